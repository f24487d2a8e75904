"""Exact-rational probabilities over the constructed model.

A base measure assigns nonnegative rationals summing to one to the level-0
worlds.  Each construction step extends it: a new world ``(x, y)`` in a
block ``Pi x Gamma`` weighs ``P(x) P(y) / P(Gamma)``, and ``(x, y)`` in
``Gamma x Pi`` weighs ``P(x) P(y) / P(Pi)``.  The extension preserves the
weight of every embedded set, so formula probabilities are level-free.
All arithmetic is exact; there is no floating point in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .evaluator import assign
from .formula import And, Cond, Formula
from .model import ModelError, ModelState
from .worlds import bit_indices


class MeasureError(ModelError):
    pass


class ReconstructionError(MeasureError):
    pass


@dataclass(frozen=True)
class BaseMeasure:
    """Rational weights on the level-0 worlds, summing to one."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise MeasureError("negative weight")
        if sum(self.weights, Fraction(0)) != 1:
            raise MeasureError("weights must sum to exactly 1")

    @property
    def strictly_positive(self) -> bool:
        return all(w > 0 for w in self.weights)

    @classmethod
    def uniform(cls, state: ModelState) -> "BaseMeasure":
        n = state.width(0)
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    @classmethod
    def from_weights(cls, weights) -> "BaseMeasure":
        return cls(tuple(Fraction(w) for w in weights))


def perturb(pi: BaseMeasure, eps: Fraction) -> BaseMeasure:
    """Mix ``pi`` with the uniform measure: strictly positive for eps in (0,1)."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise MeasureError("perturbation parameter must lie strictly in (0, 1)")
    n = len(pi.weights)
    return BaseMeasure(tuple(eps / n + (1 - eps) * w for w in pi.weights))


class MeasureState:
    """Per-level world weights extending a base measure.

    Extension is single-owner like the model itself; reads of already
    extended levels are pure.
    """

    def __init__(self, state: ModelState, base: BaseMeasure):
        if len(base.weights) != state.width(0):
            raise MeasureError(
                f"measure has {len(base.weights)} weights for "
                f"{state.width(0)} base worlds")
        self.base = base
        self._levels: list[list[Fraction]] = [list(base.weights)]

    def extended_through(self) -> int:
        return len(self._levels) - 1

    def level_weights(self, n: int) -> list[Fraction]:
        return self._levels[n]

    def extend_to(self, state: ModelState, level: int) -> None:
        while self.extended_through() < level:
            self._extend_one(state)

    def _extend_one(self, state: ModelState) -> None:
        n = self.extended_through()
        if n >= state.top:
            raise MeasureError(f"level {n + 1} not built in the model")
        w = self._levels[n]
        ev = state.history[n]
        pi_sums = []
        ga_sums = []
        for p_mask, g_mask in ev.blocks:
            ps = sum((w[i] for i in bit_indices(p_mask)), Fraction(0))
            gs = sum((w[i] for i in bit_indices(g_mask)), Fraction(0))
            if ps == 0 or gs == 0:
                raise MeasureError(
                    "zero-weight block: extension needs a strictly positive "
                    "base measure (use the perturbation limit instead)")
            pi_sums.append(ps)
            ga_sums.append(gs)
        lvl = state.level(n + 1)
        out = []
        for i in range(lvl.width):
            l, r = lvl.pairs[i]
            bi = lvl.block_of[i]
            denom = ga_sums[bi] if i < lvl.split else pi_sums[bi]
            out.append(w[l] * w[r] / denom)
        self._levels.append(out)

    def weight_of(self, state: ModelState, value) -> Fraction:
        self.extend_to(state, value.level)
        w = self._levels[value.level]
        return sum((w[i] for i in value.indices()), Fraction(0))


def init_measure(state: ModelState, pi: BaseMeasure) -> MeasureState:
    """Attach ``pi`` to the model and extend it through the built levels."""
    m = MeasureState(state, pi)
    m.extend_to(state, state.top)
    return m


def extend_level(state: ModelState, m: MeasureState, n: int) -> MeasureState:
    """Extend the weights from level ``n`` onto level ``n + 1``."""
    if m.extended_through() < n:
        raise MeasureError(f"level {n} weights not present yet")
    m.extend_to(state, n + 1)
    return m


def prob(state: ModelState, m: MeasureState, f: Formula) -> Fraction:
    """Exact probability of a formula: the weight of its value set."""
    val = assign(state, f)
    return m.weight_of(state, val.value)


class BayesResult(NamedTuple):
    lhs: Fraction
    rhs: Fraction
    equal: bool


def bayes_check(state: ModelState, m: MeasureState, phi: Formula,
                psi: Formula) -> BayesResult:
    """Compare ``P((psi|phi)) P(phi)`` against ``P(phi /\\ psi)`` exactly."""
    lhs = prob(state, m, Cond(psi, phi)) * prob(state, m, phi)
    rhs = prob(state, m, And(phi, psi))
    return BayesResult(lhs=lhs, rhs=rhs, equal=lhs == rhs)


def _poly_eval(coeffs: list[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _nullspace_vector(rows: list[list[Fraction]], ncols: int) -> Optional[list[Fraction]]:
    # Gaussian elimination; returns one nonzero kernel vector, or None.
    mat = [row[:] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    col = free[0]
    vec = [Fraction(0)] * ncols
    vec[col] = Fraction(1)
    for row_idx, pc in enumerate(pivots):
        vec[pc] = -mat[row_idx][col]
    return vec


def limit_prob(state: ModelState, pi: BaseMeasure, f: Formula,
               degree_bound: Optional[int] = None) -> Fraction:
    """Probability under ``pi`` as the limit of vanishing perturbations.

    The perturbed probability is a rational function of the perturbation
    parameter; it is reconstructed exactly from sampled evaluations and
    read off at zero.  ``degree_bound`` defaults to the world count of the
    deepest level the formula touches, a safe overestimate at desk scale;
    a reconstruction that fails its verification sample reports that the
    bound was too small rather than returning a wrong value.
    """
    val = assign(state, f)
    d = degree_bound if degree_bound is not None else state.width(val.level)
    if d < 0:
        raise MeasureError("degree bound must be nonnegative")
    n_samples = 2 * d + 2

    def sample(eps: Fraction) -> Fraction:
        m = MeasureState(state, perturb(pi, eps))
        return m.weight_of(state, val.value)

    samples: list[tuple[Fraction, Fraction]] = []
    k = 0
    while len(samples) < n_samples:
        eps = Fraction(1, k + 2)
        k += 1
        samples.append((eps, sample(eps)))

    rows = []
    for eps, y in samples:
        powers = [eps ** j for j in range(d + 1)]
        rows.append(powers + [-y * p for p in powers])
    vec = _nullspace_vector(rows, 2 * d + 2)
    if vec is None:
        raise ReconstructionError("sample system has full rank; resample")
    num = vec[: d + 1]
    den = vec[d + 1:]
    if all(c == 0 for c in den):
        raise ReconstructionError("degenerate reconstruction (zero denominator)")
    while num[0] == 0 and den[0] == 0:
        num = num[1:] + [Fraction(0)]
        den = den[1:] + [Fraction(0)]
    if den[0] == 0:
        raise ReconstructionError(
            "reconstructed function is unbounded at zero; degree bound too small?")

    # held-out verification; skip the rare sample that lands on a pole
    for _ in range(4):
        eps_v = Fraction(1, k + 2)
        k += 1
        dv = _poly_eval(den, eps_v)
        if dv == 0:
            continue
        if _poly_eval(num, eps_v) / dv != sample(eps_v):
            raise ReconstructionError(
                "verification sample disagrees: degree bound too small")
        return num[0] / den[0]
    raise ReconstructionError("verification samples kept hitting poles; resample")
