"""Band-limited maps T^d -> su(2) and structured maps T^d -> SU(2).

An AlgebraMap stores complex Fourier coefficients c(k) in a max-norm box
|k| <= N for each of the three algebra components, with the reality
constraint c(-k) = conj(c(k)) componentwise.  Group-valued maps are never
stored as raw coefficient tables; they enter only as structured conjugation
factors (constants, exponentials of algebra maps, torus morphisms) collected
in a ConjugationChain.

Sobolev norms use the weight (1 + |k|^2)^s with the Euclidean |k| inside the
weight; the Fourier box itself is a max-norm box so that truncation matches
the winding bounds of the resonance search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .arithmetic import Frequency
from .su2 import GroupElement, alg_exp_quat, quat_mul, quat_rotation_matrix


class UndersampledGridError(ValueError):
    """Grid too small to resolve the requested band."""


# ---------------------------------------------------------------------------
# scalar complex fields (no reality constraint)


def _mode_range(band: int) -> np.ndarray:
    return np.arange(-band, band + 1)


def field_synthesize(coeffs: np.ndarray, m: int, dimension: int = None) -> np.ndarray:
    """Values of sum_k c(k) exp(2 pi i k.x) on the uniform m^d grid.

    `coeffs` has shape (2N+1,)*dimension (+ optional trailing axes, carried
    along); requires m >= 2N+2 so box modes occupy distinct FFT bins.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    d = coeffs.ndim if dimension is None else dimension
    if d < 1 or coeffs.ndim < d:
        raise ValueError("bad dimension for coefficient array")
    size = coeffs.shape[0]
    if size % 2 != 1 or any(coeffs.shape[a] != size for a in range(d)):
        raise ValueError("coefficient grid axes must share an odd size")
    n = (size - 1) // 2
    if m < 2 * n + 2:
        raise UndersampledGridError("grid %d undersamples band %d" % (m, n))
    buf = np.zeros((m,) * d + coeffs.shape[d:], dtype=complex)
    idx = np.ix_(*[_mode_range(n) % m] * d)
    buf[idx] = coeffs
    return np.fft.ifftn(buf, axes=tuple(range(d))) * float(m) ** d


def field_analyze(values: np.ndarray, band: int, dimension: int) -> np.ndarray:
    """Fourier coefficients of grid samples restricted to |k| <= band."""
    values = np.asarray(values)
    m = values.shape[0]
    if any(values.shape[a] != m for a in range(dimension)):
        raise ValueError("expected a cubic grid")
    if m < 2 * band + 2:
        raise UndersampledGridError("grid %d undersamples band %d" % (m, band))
    hat = np.fft.fftn(values, axes=tuple(range(dimension))) / float(m) ** dimension
    idx = np.ix_(*[_mode_range(band) % m] * dimension)
    return hat[idx]


def _flip_conj(coeffs: np.ndarray, dimension: int) -> np.ndarray:
    return np.conj(np.flip(coeffs, axis=tuple(range(dimension))))


def mode_norm_grid(dimension: int, band: int, kind: str = "euclid") -> np.ndarray:
    """|k| on the coefficient box; 'euclid' for norms, 'max' for truncation."""
    axes = np.meshgrid(*[_mode_range(band)] * dimension, indexing="ij")
    if kind == "euclid":
        return np.sqrt(sum(a.astype(float) ** 2 for a in axes))
    if kind == "max":
        return np.max(np.abs(np.stack(axes)), axis=0)
    raise ValueError("unknown mode norm %r" % kind)


# ---------------------------------------------------------------------------
# algebra-valued maps


class AlgebraMap:
    """Finite Fourier series T^d -> su(2) on a max-norm box |k| <= band.

    coeffs has shape (2*band+1,)*dimension + (3,), complex; component order
    matches the algebra basis (e, jx, jy).
    """

    __slots__ = ("dimension", "band", "coeffs")

    def __init__(self, dimension: int, band: int, coeffs=None):
        if dimension < 1 or band < 0:
            raise ValueError("dimension must be >= 1 and band >= 0")
        shape = (2 * band + 1,) * dimension + (3,)
        if coeffs is None:
            coeffs = np.zeros(shape, dtype=complex)
        else:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.shape != shape:
                raise ValueError("coefficients have shape %r, expected %r" % (coeffs.shape, shape))
        self.dimension = dimension
        self.band = band
        self.coeffs = coeffs

    # -- construction helpers

    @classmethod
    def zeros(cls, dimension: int, band: int) -> "AlgebraMap":
        return cls(dimension, band)

    @classmethod
    def from_fields(cls, dimension: int, band: int, e_field, w_field) -> "AlgebraMap":
        """Assemble from the real e-component spectrum and the free complex
        spectrum of w = c_x + i c_y (no constraint on w)."""
        e_field = np.asarray(e_field, dtype=complex)
        w_field = np.asarray(w_field, dtype=complex)
        wm = _flip_conj(w_field, dimension)
        out = cls(dimension, band)
        out.coeffs[..., 0] = 0.5 * (e_field + _flip_conj(e_field, dimension))
        out.coeffs[..., 1] = 0.5 * (w_field + wm)
        out.coeffs[..., 2] = (w_field - wm) / 2j
        return out

    def copy(self) -> "AlgebraMap":
        return AlgebraMap(self.dimension, self.band, self.coeffs.copy())

    def _index(self, k) -> tuple:
        k = tuple(int(c) for c in k)
        if len(k) != self.dimension or any(abs(c) > self.band for c in k):
            raise KeyError("mode %r outside the box" % (k,))
        return tuple(c + self.band for c in k)

    def mode(self, k) -> np.ndarray:
        return self.coeffs[self._index(k)]

    def set_mode(self, k, value) -> None:
        """Raw single-mode assignment; does not maintain reality."""
        self.coeffs[self._index(k)] = np.asarray(value, dtype=complex)

    def set_mode_pair(self, k, value) -> None:
        """Assign c(k) = value and c(-k) = conj(value), keeping reality."""
        value = np.asarray(value, dtype=complex)
        self.coeffs[self._index(k)] = value
        self.coeffs[self._index(tuple(-c for c in k))] = np.conj(value)

    def symmetrized(self) -> "AlgebraMap":
        sym = 0.5 * (self.coeffs + _flip_conj(self.coeffs, self.dimension))
        return AlgebraMap(self.dimension, self.band, sym)

    def e_field(self) -> np.ndarray:
        return self.coeffs[..., 0].copy()

    def w_field(self) -> np.ndarray:
        """Spectrum of the complex scalar w = c_x + i c_y."""
        return self.coeffs[..., 1] + 1j * self.coeffs[..., 2]

    def padded(self, band: int) -> "AlgebraMap":
        """Same map on a larger box."""
        if band < self.band:
            raise ValueError("padding cannot shrink the band")
        out = AlgebraMap(self.dimension, band)
        sl = tuple(slice(band - self.band, band + self.band + 1)
                   for _ in range(self.dimension))
        out.coeffs[sl] = self.coeffs
        return out

    # -- arithmetic

    def __add__(self, other: "AlgebraMap") -> "AlgebraMap":
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        band = max(self.band, other.band)
        out = self.padded(band).coeffs
        out += other.padded(band).coeffs
        return AlgebraMap(self.dimension, band, out)

    def __sub__(self, other: "AlgebraMap") -> "AlgebraMap":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "AlgebraMap":
        return AlgebraMap(self.dimension, self.band, complex(scalar) * self.coeffs)

    def rotated(self, rotation: np.ndarray) -> "AlgebraMap":
        """Apply a constant rotation of algebra coordinates coefficientwise
        (the action of Ad(P) for a constant P)."""
        return AlgebraMap(self.dimension, self.band, self.coeffs @ np.asarray(rotation, dtype=float).T)

    # -- evaluation

    def evaluate_at(self, x) -> np.ndarray:
        """Pointwise value by direct summation; x is a point of T^d."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        phase = np.ones((1,) * self.dimension, dtype=complex)
        for a in range(self.dimension):
            pa = np.exp(2j * np.pi * _mode_range(self.band) * x[a])
            shape = [1] * self.dimension
            shape[a] = 2 * self.band + 1
            phase = phase * pa.reshape(shape)
        return np.real(np.tensordot(phase, self.coeffs, axes=self.dimension))

    # -- serialization

    def to_dict(self) -> dict:
        comps = {}
        names = ("e", "jx", "jy")
        nz = np.argwhere(np.any(self.coeffs != 0, axis=-1))
        for ci, name in enumerate(names):
            rows = []
            for idx in nz:
                c = self.coeffs[tuple(idx) + (ci,)]
                if c == 0:
                    continue
                k = [int(i) - self.band for i in idx]
                rows.append(k + [float(c.real), float(c.imag)])
            rows.sort()
            comps[name] = rows
        return {"dimension": self.dimension, "band": self.band, "components": comps}

    @classmethod
    def from_dict(cls, data: dict) -> "AlgebraMap":
        out = cls(int(data["dimension"]), int(data["band"]))
        for ci, name in enumerate(("e", "jx", "jy")):
            for row in data["components"].get(name, []):
                k = tuple(int(c) for c in row[: out.dimension])
                out.coeffs[out._index(k) + (ci,)] = complex(row[-2], row[-1])
        return out


# -- module-level operations on AlgebraMap -----------------------------------


def synthesize(amap: AlgebraMap, m: int) -> np.ndarray:
    """Grid values as real 3-vectors; requires m >= 2*band+2."""
    return np.real(synthesize_complex(amap, m))


def synthesize_complex(amap: AlgebraMap, m: int) -> np.ndarray:
    """Grid values before discarding the imaginary residue (diagnostics)."""
    return field_synthesize(amap.coeffs, m, amap.dimension)


def analyze(samples: np.ndarray, band: int) -> AlgebraMap:
    """Inverse of synthesize on band-limited data, reality enforced."""
    samples = np.asarray(samples, dtype=float)
    dimension = samples.ndim - 1
    coeffs = field_analyze(samples, band, dimension)
    return AlgebraMap(dimension, band, coeffs).symmetrized()


def translate(amap: AlgebraMap, alpha) -> AlgebraMap:
    """Composition with the shift x -> x + alpha: phases exp(2 pi i k.alpha)."""
    if isinstance(alpha, Frequency):
        offs = alpha.vector
    else:
        offs = np.atleast_1d(np.asarray(alpha, dtype=float))
    if offs.shape != (amap.dimension,):
        raise ValueError("offset dimension mismatch")
    phase = np.ones((1,) * amap.dimension, dtype=complex)
    for a in range(amap.dimension):
        pa = np.exp(2j * np.pi * _mode_range(amap.band) * offs[a])
        shape = [1] * amap.dimension
        shape[a] = 2 * amap.band + 1
        phase = phase * pa.reshape(shape)
    return AlgebraMap(amap.dimension, amap.band, amap.coeffs * phase[..., None])


def sobolev_norm(amap: AlgebraMap, s: float) -> float:
    """(sum_k (1+|k|^2)^s |c(k)|^2)^(1/2), Euclidean |k|, all components."""
    k2 = mode_norm_grid(amap.dimension, amap.band, "euclid") ** 2
    weight = (1.0 + k2) ** s
    return float(np.sqrt(np.sum(weight[..., None] * np.abs(amap.coeffs) ** 2)))


def truncate(amap: AlgebraMap, band: int):
    """Exact splitting into modes |k| <= band (max-norm) and the rest."""
    if band > amap.band:
        raise ValueError("truncation band exceeds the map band")
    mask = mode_norm_grid(amap.dimension, amap.band, "max") <= band
    low = AlgebraMap(amap.dimension, amap.band, np.where(mask[..., None], amap.coeffs, 0))
    high = AlgebraMap(amap.dimension, amap.band, np.where(mask[..., None], 0, amap.coeffs))
    return low, high


def random_map(dimension: int, band: int, amplitude: float, rng,
               mean_free: bool = True, norm_order: float = 0.0) -> AlgebraMap:
    """Seeded random real map scaled to the requested H^norm_order norm."""
    shape = (2 * band + 1,) * dimension + (3,)
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    amap = AlgebraMap(dimension, band, raw).symmetrized()
    if mean_free:
        amap.coeffs[(band,) * dimension] = 0.0
    norm = sobolev_norm(amap, norm_order)
    if norm > 0:
        amap = (amplitude / norm) * amap
    return amap


# ---------------------------------------------------------------------------
# structured group-valued factors and conjugation chains


def _axis_grids(dimension: int, m: int, span: float, offset) -> list:
    xs = span * np.arange(m) / m
    grids = []
    for a in range(dimension):
        g = xs + (0.0 if offset is None else float(offset[a]))
        shape = [1] * dimension
        shape[a] = m
        grids.append(g.reshape(shape))
    return grids


@dataclass(frozen=True)
class TorusMorphism:
    """x -> P exp((k.x) e) P^-1: winds through a maximal torus.

    Sends lattice points of Z^d into the center {+-Id}; under fibered
    conjugation the sign ambiguity B(x+m) = (-1)^(k.m) B(x) cancels.
    """

    winding: tuple
    frame: GroupElement = field(default_factory=GroupElement.identity)

    def __post_init__(self):
        object.__setattr__(self, "winding", tuple(int(c) for c in self.winding))

    @property
    def dimension(self) -> int:
        return len(self.winding)

    def _axis_vector(self) -> np.ndarray:
        return quat_rotation_matrix(self.frame.q) @ np.array([1.0, 0.0, 0.0])

    def evaluate_at(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = float(np.dot(self.winding, x))
        ax = self._axis_vector()
        return np.concatenate([[np.cos(np.pi * t)], np.sin(np.pi * t) * ax])

    def grid(self, m: int, offset=None, span: float = 1.0) -> np.ndarray:
        grids = _axis_grids(self.dimension, m, span, offset)
        t = sum(k * g for k, g in zip(self.winding, grids))
        t = np.broadcast_to(t, (m,) * self.dimension)
        ax = self._axis_vector()
        s = np.sin(np.pi * t)
        return np.stack([np.cos(np.pi * t), s * ax[0], s * ax[1], s * ax[2]], axis=-1)

    def inverse(self) -> "TorusMorphism":
        return TorusMorphism(tuple(-c for c in self.winding), self.frame)

    def to_dict(self) -> dict:
        return {"type": "torus", "winding": list(self.winding),
                "frame": self.frame.q.tolist()}


@dataclass(frozen=True)
class ConstantFactor:
    element: GroupElement

    @property
    def dimension(self):
        return None

    def evaluate_at(self, x) -> np.ndarray:
        return self.element.q.copy()

    def grid(self, m: int, offset=None, span: float = 1.0, dimension: int = 1) -> np.ndarray:
        return np.broadcast_to(self.element.q, (m,) * dimension + (4,))

    def inverse(self) -> "ConstantFactor":
        return ConstantFactor(self.element.inverse())

    def to_dict(self) -> dict:
        return {"type": "constant", "element": self.element.q.tolist()}


@dataclass(frozen=True)
class ExpFactor:
    """x -> exp(Y(x)) for an algebra map Y."""

    map: AlgebraMap

    @property
    def dimension(self) -> int:
        return self.map.dimension

    def evaluate_at(self, x) -> np.ndarray:
        return alg_exp_quat(self.map.evaluate_at(x))

    def grid(self, m: int, offset=None, span: float = 1.0) -> np.ndarray:
        amap = self.map if offset is None else translate(self.map, offset)
        if span == 1.0:
            vals = synthesize(amap, m)
        elif span == 2.0:
            if m % 2:
                raise ValueError("double-cover sampling needs an even grid")
            half = synthesize(amap, m // 2)
            vals = half
            for a in range(self.dimension):
                vals = np.concatenate([vals, vals], axis=a)
        else:
            raise ValueError("span must be 1 or 2")
        return alg_exp_quat(vals)

    def inverse(self) -> "ExpFactor":
        return ExpFactor((-1.0) * self.map)

    def to_dict(self) -> dict:
        return {"type": "exp", "map": self.map.to_dict()}


def factor_from_dict(data: dict):
    kind = data["type"]
    if kind == "torus":
        return TorusMorphism(tuple(data["winding"]), GroupElement(np.asarray(data["frame"])))
    if kind == "constant":
        return ConstantFactor(GroupElement(np.asarray(data["element"])))
    if kind == "exp":
        return ExpFactor(AlgebraMap.from_dict(data["map"]))
    raise ValueError("unknown factor type %r" % kind)


@dataclass(frozen=True)
class ConjugationChain:
    """Ordered product of conjugation factors; the leftmost factor is the
    most recent one (applied last), matching the update H_new = G . H_old."""

    factors: tuple = ()
    dimension: int = 1

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if f.dimension is not None and f.dimension != self.dimension:
                raise ValueError("factor dimension mismatch")

    def __len__(self) -> int:
        return len(self.factors)

    def prepended(self, factor) -> "ConjugationChain":
        return ConjugationChain((factor,) + self.factors, self.dimension)

    def composed_with(self, older: "ConjugationChain") -> "ConjugationChain":
        return ConjugationChain(self.factors + older.factors, self.dimension)

    def inverse(self) -> "ConjugationChain":
        return ConjugationChain(tuple(f.inverse() for f in reversed(self.factors)), self.dimension)

    def evaluate_at(self, x) -> np.ndarray:
        q = np.array([1.0, 0.0, 0.0, 0.0])
        for f in self.factors:
            q = quat_mul(q, f.evaluate_at(x))
        return q

    def grid(self, m: int, offset=None, span: float = 1.0) -> np.ndarray:
        acc = None
        for f in self.factors:
            if isinstance(f, ConstantFactor):
                g = f.grid(m, offset, span, dimension=self.dimension)
            else:
                g = f.grid(m, offset, span)
            acc = g if acc is None else quat_mul(acc, g)
        if acc is None:
            return np.broadcast_to(np.array([1.0, 0.0, 0.0, 0.0]),
                                   (m,) * self.dimension + (4,)).copy()
        return acc

    def application_prefixes(self):
        """Partial products in the order the factors were applied: the i-th
        prefix is the product of the i oldest factors."""
        return [ConjugationChain(self.factors[len(self.factors) - i:], self.dimension)
                for i in range(1, len(self.factors) + 1)]

    def content_bound(self) -> int:
        """Crude per-axis frequency content (in half-integer units on the
        double cover) of the product: torus windings plus linearised
        exponential bands."""
        total = 0
        for f in self.factors:
            if isinstance(f, TorusMorphism):
                total += max(abs(c) for c in f.winding)
            elif isinstance(f, ExpFactor):
                total += 2 * f.map.band
        return total

    def to_dict(self) -> dict:
        return {"dimension": self.dimension,
                "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, data: dict) -> "ConjugationChain":
        return cls(tuple(factor_from_dict(f) for f in data["factors"]),
                   int(data["dimension"]))


def chain_evaluate(chain: ConjugationChain, x) -> GroupElement:
    """Pointwise value of the chain product; the empty chain is the identity."""
    return GroupElement(chain.evaluate_at(x))


def chain_sobolev_partial(chain: ConjugationChain, s: float, m: int):
    """H^s norms of the application-order prefix products of the chain.

    Prefixes are sampled on the double cover [0, 2)^d (torus morphisms with
    odd windings are only periodic there; for even windings this agrees with
    the single-period computation) and analysed componentwise on the
    quaternion coordinates, so frequencies live on the half-integer lattice.
    This is the Cauchy diagnostic for convergence in negative Sobolev spaces.
    """
    if m % 2:
        raise ValueError("double-cover sampling needs an even grid")
    need = 2 * chain.content_bound() + 2
    if m < need:
        raise UndersampledGridError("grid %d undersamples chain content (need >= %d)" % (m, need))
    d = chain.dimension
    freqs = np.fft.fftfreq(m, d=1.0 / m) / 2.0
    k2 = sum(g ** 2 for g in np.meshgrid(*[freqs] * d, indexing="ij"))
    weight = (1.0 + k2) ** s
    norms = []
    for prefix in chain.application_prefixes():
        samples = prefix.grid(m, span=2.0)
        hat = np.fft.fftn(samples, axes=tuple(range(d))) / float(m) ** d
        norms.append(float(np.sqrt(np.sum(weight[..., None] * np.abs(hat) ** 2))))
    return norms
