"""Explored-mass bookkeeping for the probabilistic AND-OR search.

The ledger tracks, for the currently simulated branch ``h_curr`` of
length L (entries 0..n, n = L-1, each entry carrying the probability of
the step that entered it), one accounting slot per index 0..L:

* ``goal[k]`` / ``fail[k]`` / ``noter[k]``: explored mass of goal /
  failing / never-terminating continuations measured *from* the combined
  state ``h_curr[k-1]``, restricted to continuations that do not revisit
  ``h_curr[:k-1]`` and (for k <= n) do not begin with the on-branch step
  into ``h_curr[k]``.  Slot L is the open frontier: terminal events at
  the current node are recorded there with just their final step
  probability.
* ``loop[k][m]``: explored mass of cycles that return to ``h_curr[k]``,
  measured from ``h_curr[k]`` (the full cycle traversal probability),
  bucketed by the index m at which the cycle was sealed.  Fresh records
  always land in column L; folds migrate them to lower columns.

``calc_lambda`` turns the slots into sound lower bounds
(lambda vectors) by amplifying through-branch mass with the geometric
series of every cycle recorded at intermediate indices.  ``cumulate_alpha``
folds the frontier slot into its parent when the branch retreats, chosen
so that ``calc_lambda`` is invariant under the fold.

Arithmetic is exact (Fractions) unless the ledger is built with
``exact=False``, in which case floats and epsilon comparisons are used
(benchmark mode only; every correctness test runs exact).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

_FLOAT_EPS = 1e-12


class LedgerError(AssertionError):
    """Internal accounting invariant violated: indicates a search bug."""


@dataclass(frozen=True)
class LambdaVector:
    """Per-index lower bounds derived from a ledger by ``calc_lambda``."""

    goal: tuple
    fail: tuple
    noter: tuple
    loop: tuple

    @property
    def goal0(self):
        return self.goal[0]

    @property
    def fail0(self):
        return self.fail[0]

    @property
    def noter0(self):
        return self.noter[0]


class SearchLedger:
    """Mutable search-branch state: ``h_curr`` plus the alpha slots."""

    __slots__ = ("qs", "ss", "ps", "pos", "goal", "fail", "noter", "loop", "exact", "events")

    def __init__(self, exact: bool = True):
        self.qs: list[int] = []
        self.ss: list[int] = []
        self.ps: list = []
        self.pos: dict[tuple[int, int], int] = {}
        zero = Fraction(0) if exact else 0.0
        self.goal = [zero]
        self.fail = [zero]
        self.noter = [zero]
        self.loop = [[zero]]
        self.exact = exact
        #: bumped on every mass record; lets callers skip redundant lambda
        #: evaluations (folds do not bump it because they preserve lambda)
        self.events = 0

    # -- shape ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.qs)

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def index_of(self, q: int, s: int):
        """Index of combined state (q, s) in h_curr, or None."""
        return self.pos.get((q, s))

    def step_prob(self, k: int):
        return self.ps[k]

    def extend(self, q: int, s: int, p) -> None:
        """Append a combined state to h_curr; grow every slot by one zero."""
        if (q, s) in self.pos:
            raise LedgerError("h_curr must not contain a combined state twice")
        self.pos[(q, s)] = len(self.qs)
        self.qs.append(q)
        self.ss.append(s)
        self.ps.append(p)
        zero = self._zero()
        self.goal.append(zero)
        self.fail.append(zero)
        self.noter.append(zero)
        for row in self.loop:
            row.append(zero)
        self.loop.append([zero] * (len(self.qs) + 1))

    # -- mass records -----------------------------------------------------

    def record_goal(self, p) -> None:
        self.goal[len(self.qs)] += p
        self.events += 1

    def record_fail(self, p) -> None:
        self.fail[len(self.qs)] += p
        self.events += 1

    def record_noter(self, p) -> None:
        self.noter[len(self.qs)] += p
        self.events += 1

    def record_loop(self, k: int, p_loop) -> None:
        """Seal a decaying cycle back to index k (traversal mass < 1)."""
        if not 0 <= k < len(self.qs):
            raise LedgerError("loop record outside h_curr")
        self.loop[k][len(self.qs)] += p_loop
        self.events += 1

    def loop_mass_to(self, k: int):
        """Traversal probability of the on-branch suffix h_curr[k:]; the
        caller multiplies the closing step probability in."""
        acc = Fraction(1) if self.exact else 1.0
        for t in range(k + 1, len(self.qs)):
            acc *= self.ps[t]
        return acc

    # -- snapshots (copy-on-branch, restored on backtrack) ---------------

    def snapshot(self):
        """Full copy of the branch and alpha slots.

        Folds running between snapshot and restore legitimately shorten
        h_curr below its snapshot length, so the branch contents are
        stored, not just a length."""
        return (
            list(self.qs),
            list(self.ss),
            list(self.ps),
            list(self.goal),
            list(self.fail),
            list(self.noter),
            [list(row) for row in self.loop],
        )

    def restore(self, snap) -> None:
        qs, ss, ps, goal, fail, noter, loop = snap
        self.qs = list(qs)
        self.ss = list(ss)
        self.ps = list(ps)
        self.pos = {(q, s): k for k, (q, s) in enumerate(zip(self.qs, self.ss))}
        self.goal = list(goal)
        self.fail = list(fail)
        self.noter = list(noter)
        self.loop = [list(row) for row in loop]
        self.events += 1

    # -- numeric-mode comparisons ----------------------------------------

    def _is_one(self, x) -> bool:
        if self.exact:
            return x == 1
        return abs(x - 1) <= _FLOAT_EPS

    def _is_zero(self, x) -> bool:
        if self.exact:
            return x == 0
        return abs(x) <= _FLOAT_EPS

    def _above_one(self, x) -> bool:
        if self.exact:
            return x > 1
        return x > 1 + _FLOAT_EPS


def calc_lambda(ledger: SearchLedger) -> LambdaVector:
    """Lower-bound vectors for the current branch, highest index first.

    May mutate the ledger: when the explored cycle mass at an index plus
    the never-terminating mass from that index saturate the whole unit of
    probability, nothing entering that index can ever terminate; the loop
    slots at and below it are zeroed out and the full step mass is
    reclassified as never-terminating.  Without this rule the geometric
    amplification would divide by zero exactly when a combination of
    decaying cycles never terminates.
    """
    L = len(ledger)
    n = L - 1
    lam_goal = [None] * (L + 1)
    lam_fail = [None] * (L + 1)
    lam_noter = [None] * (L + 1)
    lam_loop = [None] * (L + 1)
    loop = ledger.loop
    zero = ledger._zero()

    for k in range(L, -1, -1):
        # cycle mass at index k: row k amplified by cycles at intermediate
        # indices strictly between the target k and each sealing column
        row = loop[k]
        acc = zero
        if any(row):
            amp = 1
            for m in range(k, L + 1):
                v = row[m]
                if v:
                    acc += amp * v
                if m > k:
                    denom = 1 - lam_loop[m]
                    if ledger._is_zero(denom):
                        raise LedgerError("cycle amplification hit mass 1 past saturation")
                    amp = amp / denom if denom != 1 else amp
        if ledger._above_one(acc):
            raise LedgerError(f"cycle mass above 1 at index {k}")
        lam_loop[k] = acc

        if k <= n:
            total = lam_loop[k] + lam_noter[k + 1]
            if ledger._above_one(total):
                raise LedgerError(f"cycle+noter mass above 1 at index {k}")
            if ledger._is_one(total) and not ledger._is_zero(lam_loop[k]):
                _saturate(ledger, k)
                lam_loop[k] = zero
                lam_noter[k + 1] = 1 - zero

        if k == L:
            lam_goal[k] = ledger.goal[k]
            lam_fail[k] = ledger.fail[k]
            lam_noter[k] = ledger.noter[k]
        else:
            denom = 1 - lam_loop[k]
            if ledger._is_zero(denom):
                raise LedgerError("division by zero cycle headroom: saturation rule missed")
            pk = ledger.ps[k]
            through = pk / denom
            lam_goal[k] = through * lam_goal[k + 1] + ledger.goal[k]
            lam_fail[k] = through * lam_fail[k + 1] + ledger.fail[k]
            lam_noter[k] = through * lam_noter[k + 1] + ledger.noter[k]
        for vec in (lam_goal, lam_fail, lam_noter):
            v = vec[k]
            if v < 0 or ledger._above_one(v):
                raise LedgerError(f"lambda component {v} outside [0,1] at index {k}")
        # goal, fail and noter continuations are disjoint trajectory sets
        if ledger._above_one(lam_goal[k] + lam_fail[k] + lam_noter[k]):
            raise LedgerError(f"goal+fail+noter mass above 1 at index {k}")

    return LambdaVector(tuple(lam_goal), tuple(lam_fail), tuple(lam_noter), tuple(lam_loop))


def _saturate(ledger: SearchLedger, k: int) -> None:
    """Apply the dead-index rule: everything entering h_curr[k] is lost.

    All mass from index k provably sits in its cycle and noter slots, so
    any goal/fail slot past k, and any cycle slot sealed past k for a
    target below k, must already be zero; that is asserted, not repaired.
    """
    L = len(ledger)
    zero = ledger._zero()
    for j in range(k + 1, L + 1):
        if not ledger._is_zero(ledger.goal[j]) or not ledger._is_zero(ledger.fail[j]):
            raise LedgerError("goal/fail mass recorded beyond a saturated index")
    for j in range(k):
        row = ledger.loop[j]
        for m in range(max(j, k + 1), L + 1):
            if not ledger._is_zero(row[m]):
                raise LedgerError("cycle mass through a saturated index")
    for j in range(k, L + 1):
        row = ledger.loop[j]
        for m in range(j, L + 1):
            row[m] = zero
    for j in range(k + 2, L + 1):
        ledger.noter[j] = zero
    ledger.noter[k + 1] = 1 - zero
    ledger.events += 1


def cumulate_alpha(ledger: SearchLedger) -> SearchLedger:
    """Fold the frontier slot into its parent and shorten h_curr by one.

    The new slot values are chosen so that ``calc_lambda`` returns the
    same values before and after the fold (on the shared indices); the
    through mass of the disappearing entry is amplified by its recorded
    cycles and charged to the parent slot.  Mutates and returns the
    ledger.
    """
    L = len(ledger)
    if L == 0:
        raise LedgerError("cannot fold a ledger with an empty branch")
    n = L - 1
    lam = calc_lambda(ledger)
    denom = 1 - lam.loop[n]
    if ledger._is_zero(denom):
        raise LedgerError("fold hit cycle mass 1: saturation rule missed")
    pn = ledger.ps[n]
    through = pn / denom
    ledger.goal[n] += through * ledger.goal[L]
    ledger.fail[n] += through * ledger.fail[L]
    ledger.noter[n] += through * ledger.noter[L]
    del ledger.goal[L], ledger.fail[L], ledger.noter[L]

    amp = 1 / denom if denom != 1 else 1
    new_loop = []
    for j in range(n):
        row = ledger.loop[j]
        row[n] += amp * row[L]
        del row[L]
        new_loop.append(row)
    new_loop.append([ledger._zero()] * L)
    ledger.loop = new_loop

    del ledger.pos[(ledger.qs[n], ledger.ss[n])]
    del ledger.qs[n], ledger.ss[n], ledger.ps[n]
    return ledger
