"""Word enumeration over matrix generator sets, primitive conjugacy
classes of free groups, eigen fixed-point data, sampled limit maps, and
the top-gap growth diagnostic.

Words are tuples of signed ints: +k is generator k-1, -k its inverse.
Internally, enumeration uses a dense letter code l in {0, .., 2k-1} with
l ^ 1 the inverse letter, so whole word levels live in int8 arrays and
necklace filtering is vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import (BudgetExceeded, InsufficientData, NotProximal,
                     NotTransverse, UnsupportedPresentation)
from .projlinalg import (EigenData, Matrix, ProjHyperplane, ProjPoint,
                         eigen_decompose, projective_distance, require_proximal,
                         transversality_margin)

DEDUP_DISTANCE = 1e-9


def reduce_word(word) -> tuple[int, ...]:
    """Freely reduce a sequence of signed letters."""
    out: list[int] = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(int(s))
    return tuple(out)


def invert_word(word) -> tuple[int, ...]:
    return tuple(-s for s in reversed(word))


def cyclic_reduce(word) -> tuple[int, ...]:
    w = list(reduce_word(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def _code_to_signed(code: int) -> int:
    g = code // 2 + 1
    return g if code % 2 == 0 else -g


def _signed_to_code(s: int) -> int:
    return 2 * (abs(s) - 1) + (0 if s > 0 else 1)


@dataclass(frozen=True)
class GeneratorSet:
    """Labelled unimodular generators with verified inverses.

    presentation is "free" (word combinatorics are exact) or "unknown"
    (conjugacy enumeration falls back to a labelled heuristic).
    """

    labels: tuple[str, ...]
    mats: tuple[Matrix, ...]
    invs: tuple[Matrix, ...]
    presentation: str = "free"

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("generator labels must be distinct")
        if self.presentation not in ("free", "unknown"):
            raise ValueError(f"unknown presentation tag {self.presentation!r}")
        for label, m, mi in zip(self.labels, self.mats, self.invs):
            err = np.max(np.abs(m.a @ mi.a - np.eye(m.dim)))
            tol = max(1e-10, 64 * np.finfo(float).eps * float(np.linalg.norm(m.a)) ** 2)
            if err > tol:
                raise ValueError(f"inverse of generator {label!r} off by {err:.2e}")

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.mats[0].dim

    def letter_matrix(self, signed: int) -> Matrix:
        return self.mats[signed - 1] if signed > 0 else self.invs[-signed - 1]

    def letter_stack(self) -> np.ndarray:
        """(2k, d, d) array of letter matrices in dense-code order."""
        out = np.empty((2 * self.rank, self.dim, self.dim))
        for i in range(self.rank):
            out[2 * i] = self.mats[i].a
            out[2 * i + 1] = self.invs[i].a
        return out

    def word_matrix(self, word) -> Matrix:
        m = np.eye(self.dim)
        for s in reduce_word(word):
            m = m @ self.letter_matrix(s).a
        return Matrix(m)


def generator_set(labels, matrices, presentation="free") -> GeneratorSet:
    mats = tuple(m if isinstance(m, Matrix) else Matrix(m) for m in matrices)
    invs = tuple(m.inverse() for m in mats)
    return GeneratorSet(tuple(labels), mats, invs, presentation)


class GroupElement:
    """A group element: reduced word plus its matrix, with lazy eigendata."""

    __slots__ = ("word", "matrix", "_eigen")

    def __init__(self, word, matrix: Matrix):
        self.word = reduce_word(word)
        self.matrix = matrix
        self._eigen: EigenData | None = None

    def eigen(self) -> EigenData:
        if self._eigen is None:
            self._eigen = eigen_decompose(self.matrix)
        return self._eigen

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def cyclic_length(self) -> int:
        return len(cyclic_reduce(self.word))

    def inverse(self) -> "GroupElement":
        return GroupElement(invert_word(self.word), self.matrix.inverse())

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.word + other.word, self.matrix @ other.matrix)

    def word_str(self, labels=None) -> str:
        if not self.word:
            return "e"
        parts = []
        for s in self.word:
            name = labels[abs(s) - 1] if labels else chr(ord("a") + abs(s) - 1)
            parts.append(name if s > 0 else name + "'")
        return "".join(parts)

    def __repr__(self):
        return f"GroupElement({self.word_str()})"


def power(g: GroupElement, n: int) -> GroupElement:
    out = GroupElement((), Matrix(np.eye(g.matrix.dim)))
    base = g if n >= 0 else g.inverse()
    for _ in range(abs(n)):
        out = out * base
    return out


def _level_iter(gens: GeneratorSet, radius: int,
                with_products: bool = True) -> Iterator[tuple[np.ndarray, np.ndarray | None]]:
    """Yield (words, products) per word length 1..radius, in parent-major order.

    words is (m, n) int8 of dense letter codes, products is (m, d, d).
    Level n+1 is built from level n by appending every letter that does not
    cancel, so the order is deterministic.
    """
    if radius < 1 or gens.rank == 0:
        return
    k2 = 2 * gens.rank
    stack = gens.letter_stack() if with_products else None
    words = np.arange(k2, dtype=np.int8).reshape(-1, 1)
    prods = stack.copy() if with_products else None
    yield words, prods
    for _ in range(1, radius):
        m = words.shape[0]
        parent_idx = np.repeat(np.arange(m), k2)
        letters = np.tile(np.arange(k2, dtype=np.int8), m)
        keep = letters != (words[parent_idx, -1] ^ 1)
        parent_idx = parent_idx[keep]
        letters = letters[keep]
        words = np.concatenate([words[parent_idx], letters.reshape(-1, 1)], axis=1)
        if with_products:
            prods = np.einsum("mij,mjk->mik", prods[parent_idx], stack[letters])
        yield words, prods


def free_ball_size(rank: int, radius: int) -> int:
    """1 + sum over n of 2k (2k-1)^(n-1): freely reduced words of length <= radius."""
    total = 1
    for n in range(1, radius + 1):
        total += 2 * rank * (2 * rank - 1) ** (n - 1)
    return total


def enumerate_ball(gens: GeneratorSet, radius: int,
                   cap: int | None = None) -> list[GroupElement]:
    """All freely reduced words of length <= radius, identity first.

    Raises BudgetExceeded before materializing anything if the free-group
    count formula already overruns the cap.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if cap is not None and free_ball_size(gens.rank, radius) > cap:
        raise BudgetExceeded(
            f"ball of radius {radius} has {free_ball_size(gens.rank, radius)} elements, cap {cap}")
    out = [GroupElement((), Matrix(np.eye(gens.dim)))]
    for words, prods in _level_iter(gens, radius):
        for row, p in zip(words, prods):
            word = tuple(_code_to_signed(int(c)) for c in row)
            out.append(GroupElement(word, Matrix(p)))
    return out


def _necklace_masks(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(minimal, primitive) masks over rows of cyclically reduced words.

    A row is minimal when it is lexicographically <= all of its rotations,
    and primitive when it equals none of its proper rotations.
    """
    m, n = words.shape
    minimal = np.ones(m, dtype=bool)
    primitive = np.ones(m, dtype=bool)
    if n == 1:
        return minimal, primitive
    rows = np.arange(m)
    for s in range(1, n):
        rot = np.roll(words, -s, axis=1)
        diff = rot.astype(np.int16) - words
        neq = diff != 0
        any_neq = neq.any(axis=1)
        first = neq.argmax(axis=1)
        val = diff[rows, first]
        minimal &= ~(any_neq & (val < 0))
        primitive &= any_neq
    return minimal, primitive


def iter_primitive_classes(gens: GeneratorSet, radius: int,
                           with_products: bool = True
                           ) -> Iterator[tuple[np.ndarray, np.ndarray | None]]:
    """Per length, (words, products) of one representative per primitive class.

    Representatives are the rotation-minimal cyclically reduced words,
    proper powers excluded. Requires a free presentation.
    """
    if gens.presentation != "free":
        raise UnsupportedPresentation(
            "exact conjugacy enumeration needs a free presentation; "
            "use spectrum_classes for the labelled heuristic")
    for words, prods in _level_iter(gens, radius, with_products):
        n = words.shape[1]
        if n == 1:
            cyc = np.ones(words.shape[0], dtype=bool)
        else:
            cyc = words[:, 0] != (words[:, -1] ^ 1)
        words = words[cyc]
        prods = prods[cyc] if with_products else None
        minimal, primitive = _necklace_masks(words)
        keep = minimal & primitive
        yield words[keep], (prods[keep] if with_products else None)


def primitive_conj_classes(gens: GeneratorSet, radius: int,
                           cap: int | None = None) -> list[GroupElement]:
    """One GroupElement per primitive conjugacy class of word length <= radius."""
    out: list[GroupElement] = []
    for words, prods in iter_primitive_classes(gens, radius):
        if cap is not None and len(out) + words.shape[0] > cap:
            raise BudgetExceeded(f"class count exceeds cap {cap}")
        for row, p in zip(words, prods):
            word = tuple(_code_to_signed(int(c)) for c in row)
            out.append(GroupElement(word, Matrix(p)))
    return out


def spectrum_classes(gens: GeneratorSet, radius: int,
                     tol: float = 1e-6, cap: int | None = None) -> list[GroupElement]:
    """Heuristic conjugacy dedup by rounded log-modulus spectrum.

    Collisions between genuinely distinct classes with matching spectra are
    possible; this path exists so non-free presentations still produce
    counting data, and is labelled as heuristic wherever surfaced.
    """
    seen: dict[tuple, GroupElement] = {}
    for g in enumerate_ball(gens, radius, cap=cap):
        if not g.word:
            continue
        data = g.eigen()
        key = tuple(np.round(data.lam / tol).astype(np.int64).tolist())
        if key not in seen:
            seen[key] = g
    out = list(seen.values())
    # drop proper powers: spectrum of g^k is k * spectrum of g
    keys = {tuple(np.round(g.eigen().lam / tol).astype(np.int64).tolist()) for g in out}
    primitive = []
    for g in out:
        lam = g.eigen().lam
        is_power = False
        for k in range(2, g.length + 1):
            base_key = tuple(np.round(lam / k / tol).astype(np.int64).tolist())
            if base_key in keys and base_key != tuple(np.round(lam / tol).astype(np.int64).tolist()):
                is_power = True
                break
        if not is_power:
            primitive.append(g)
    return primitive


def fixed_points(g: GroupElement) -> tuple[ProjPoint, ProjHyperplane]:
    """Attracting line and repelling hyperplane of a proximal element.

    The hyperplane is the dominant left eigenline: the covector alpha with
    alpha o g = mu_max alpha, whose kernel is the repelling hyperplane of
    the projective dynamics.
    """
    data = require_proximal(g.eigen(), f"element {g.word_str()}")
    return data.top_right, data.top_left


@dataclass(frozen=True)
class LimitSample:
    """One sampled boundary point: attracting line, its dual hyperplane,
    the source word, and the source top gap in nats as quality."""

    xi: ProjPoint
    xi_star: ProjHyperplane
    source_word: tuple[int, ...]
    quality: float


def limit_set_sample(gens: GeneratorSet, depth: int,
                     budget: int | None = None) -> list[LimitSample]:
    """Fixed-point data over the word ball, deduplicated at DEDUP_DISTANCE.

    Each proximal g contributes the boundary point of its forward fixed
    line: xi from g, xi_star from g^-1 (the two share a boundary point).
    Samples are kept best-quality-first, so refining the depth refines the
    sample rather than reshuffling it.
    """
    if gens.rank == 0:
        return []
    ball = enumerate_ball(gens, depth, cap=budget)
    by_word = {g.word: g for g in ball}
    raw: list[LimitSample] = []
    for g in ball:
        if not g.word:
            continue
        data = g.eigen()
        if not data.simple_top:
            continue
        ginv = by_word.get(invert_word(g.word))
        if ginv is None:
            continue
        inv_data = ginv.eigen()
        if not inv_data.simple_top:
            continue
        gap = float(data.lam[0] - data.lam[1])
        raw.append(LimitSample(xi=data.top_right, xi_star=inv_data.top_left,
                               source_word=g.word, quality=gap))
    raw.sort(key=lambda s: (-s.quality, s.source_word))
    kept: list[LimitSample] = []
    reps = np.empty((len(raw), gens.dim))
    for s in raw:
        n = len(kept)
        if n:
            dots = reps[:n] @ s.xi.rep
            if float(np.min(1.0 - dots * dots)) < DEDUP_DISTANCE ** 2:
                continue
        reps[n] = s.xi.rep
        kept.append(s)
    return kept


@dataclass(frozen=True)
class GapFit:
    """Least-squares fit of the top gap against cyclically reduced length."""

    c: float
    c_prime: float
    r2: float
    n_points: int


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), r2


def gap_fit(elements) -> GapFit:
    """Fit gap(g) ~ c * cyclic_length(g) - c_prime over proximal elements.

    Cyclically reduced length is the stable-length proxy; it is exact for
    free presentations.
    """
    xs, ys = [], []
    for g in elements:
        if not g.word:
            continue
        data = g.eigen()
        if not data.simple_top:
            continue
        xs.append(g.cyclic_length)
        ys.append(float(data.lam[0] - data.lam[1]))
    if len(xs) < 10:
        raise InsufficientData(f"need >= 10 proximal elements, got {len(xs)}")
    slope, intercept, r2 = _linear_fit(np.array(xs, dtype=float), np.array(ys))
    return GapFit(c=slope, c_prime=-intercept, r2=r2, n_points=len(xs))


@dataclass(frozen=True)
class ConvergenceSeries:
    """Distances d(g^n l, attracting point) with a log-linear decay fit."""

    distances: np.ndarray
    slope: float | None
    r2: float | None
    gap: float


def convergence_probe(g: GroupElement, ell: ProjPoint, n_max: int) -> ConvergenceSeries:
    """Iterate g on a transverse line and record convergence to the fixed point.

    The pre-condition margin against the repelling hyperplane is 1e-6; the
    fitted slope should not exceed -(lambda_1 - lambda_2) by more than the
    sampling slack.
    """
    data = require_proximal(g.eigen())
    target, repelling = data.top_right, data.top_left
    if transversality_margin(ell, repelling) < 1e-6:
        raise NotTransverse("start line is too close to the repelling hyperplane")
    gap = float(data.lam[0] - data.lam[1])
    dists = np.empty(n_max + 1)
    x = ell.rep.copy()
    for n in range(n_max + 1):
        dists[n] = projective_distance(ProjPoint(x), target)
        x = g.matrix.a @ x
        x /= np.linalg.norm(x)
    positive = dists > 1e-15
    if positive.sum() < 3:
        return ConvergenceSeries(distances=dists, slope=None, r2=None, gap=gap)
    idx = np.nonzero(positive)[0]
    slope, _, r2 = _linear_fit(idx.astype(float), np.log(dists[idx]))
    return ConvergenceSeries(distances=dists, slope=slope, r2=r2, gap=gap)
