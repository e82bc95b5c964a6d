"""Instantiating generalisation variables by bounded testing.

A putative invariant speaks about generalisation variables that stand
for "some value changing across iterations".  To certify it, each such
variable v needs three witnesses:

* an *initial* expression over program variables — the invariant,
  instantiated with it, must hold when the loop is first entered;
* a *step* expression over program variables and v's previous value —
  walking it along every observed iteration must keep the invariant
  true; and
* a *final* expression — the invariant instantiated with it, together
  with the negated guard, must imply the loop's postcondition.

Witnesses are searched for among small expression templates, smallest
first, against trajectories collected by actually running the program
on every input store within the domain bound whose values satisfy the
precondition.  Everything is a bounded check over the naturals, so a
positive verdict is "verified up to the bound", never a proof.

Errors during testing are treated asymmetrically, matching their
meaning.  A candidate initial (or final) whose evaluation fails on a
tested store is rejected outright.  A *step* whose evaluation fails
mid-trajectory truncates that one trajectory — the candidate is not
punished for a run it cannot speak about (division steps on runs where
the divisor is zero, say) — but a step must validate at least one
transition somewhere when transitions exist, so perpetually-erroring
junk like v/0 still loses.

The invariant's conjuncts are partitioned into connected components by
shared generalisation variables and each component is solved
independently (initials major, steps backtracked per initial); finals
are then searched jointly across all variables.  When the loop body
branches at the top level, step candidates additionally include
conditional expressions choosing between two templates by the branch
condition.  The assembled assignment is re-verified from scratch by
``check_requirements``, an independent implementation of the three
checks, and that verdict is what gets reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .evaluator import EvalError, Finished, Store, eval_expr, exec_stmt, holds
from .parser import pretty
from .terms import (
    Assign,
    Block,
    Case,
    Expr,
    If,
    Num,
    Op,
    Seq,
    Skip,
    Stmt,
    Triple,
    Var,
    While,
    free_vars,
    program_vars,
    substitute,
)
from .wlp import top_conjuncts


@dataclass(frozen=True)
class SolverConfig:
    domain_bound: int = 6
    template_depth: int = 2
    literal_pool: tuple[int, ...] = (0, 1, 2)
    operator_pool: tuple[str, ...] = ("+", "-", "*", "/", "%", "^")
    exec_fuel: int = 10_000
    max_candidates: int = 200_000

    def __post_init__(self) -> None:
        if self.domain_bound < 1 or self.template_depth < 1:
            raise ValueError("bounds must be positive")


@dataclass
class Assignment:
    """Chosen witnesses per generalisation variable."""

    initial: dict[str, Expr]
    step: dict[str, Expr]
    final: dict[str, Expr]


@dataclass
class SolveStats:
    candidates_tried: int = 0
    stores_tested: int = 0
    eval_rejections: int = 0
    step_truncations: int = 0
    runs_collected: int = 0
    runs_skipped: int = 0


@dataclass(frozen=True)
class Verdict:
    pass


@dataclass(frozen=True)
class VerifiedUpToBound(Verdict):
    bound: int


@dataclass(frozen=True)
class Failed(Verdict):
    requirement: int  # 1 = on entry, 2 = preservation, 3 = implies post
    counterexample: tuple[tuple[str, int], ...]

    def store(self) -> Store:
        return dict(self.counterexample)


@dataclass
class InvariantReport:
    invariant: Expr
    genvars: tuple[str, ...]
    assignment: Assignment | None
    verdict: Verdict
    stats: SolveStats


class SolverFailure(Exception):
    """No witness assignment was found.

    `requirement` names the first unsatisfiable check: 1 when no initial
    candidate held on the collected entry stores, 2 when some initial
    held but every step candidate broke a trajectory, 3 when finals
    failed.  `detail` is human-readable; `stats` records the search
    effort."""

    def __init__(self, requirement: int, detail: str, stats: SolveStats):
        super().__init__(f"requirement {requirement}: {detail}")
        self.kind = "NoCandidate"
        self.requirement = requirement
        self.detail = detail
        self.stats = stats


class _Budget(Exception):
    pass


# ---------------------------------------------------------------------------
# Trajectories


@dataclass
class LoopRun:
    """One dynamic visit to a loop: the store at entry, before/after each
    body iteration, and at exit."""

    entry: Store
    pres: list[Store] = field(default_factory=list)
    posts: list[Store] = field(default_factory=list)
    exit: Store | None = None

    @property
    def transitions(self) -> list[tuple[Store, Store]]:
        return list(zip(self.pres, self.posts))


def input_vars(triple: Triple) -> list[str]:
    """Variables whose initial value the program can observe: free in the
    precondition or read before ever being written."""
    inputs: set[str] = set(free_vars(triple.pre))

    def walk(st: Stmt, written: set[str]) -> set[str]:
        match st:
            case Skip():
                return written
            case Assign(var, rhs):
                inputs.update(free_vars(rhs) - written)
                return written | {var}
            case Seq(a, b):
                return walk(b, walk(a, written))
            case If(cond, t, e):
                inputs.update(free_vars(cond) - written)
                return walk(t, set(written)) & walk(e, set(written))
            case Block(locs, body):
                inner = walk(body, written | set(locs))
                return (inner - set(locs)) | written
            case While(cond, body):
                inputs.update(free_vars(cond) - written)
                walk(body, set(written))  # body may run zero times
                return written
            case _:
                raise TypeError(f"not a Stmt: {st!r}")

    walk(triple.program, set())
    return sorted(inputs)


def collect_trajectories(
    triple: Triple, loop: While, cfg: SolverConfig, stats: SolveStats | None = None
) -> list[LoopRun]:
    """Run the program on every precondition-satisfying input store with
    values ≤ domain_bound; record `loop`'s entries, iterations and exits.
    `loop` is matched by object identity, so pass the node from the very
    program being run.  Runs that do not finish cleanly are skipped."""
    stats = stats if stats is not None else SolveStats()
    everything = sorted(program_vars(triple))
    ins = input_vars(triple)
    runs: list[LoopRun] = []
    for values in itertools.product(range(cfg.domain_bound + 1), repeat=len(ins)):
        store = {v: 0 for v in everything}
        store.update(zip(ins, values))
        if not holds(triple.pre, store):
            continue

        events: list[tuple[str, Store]] = []

        def hook(ev: str, node: While, snapshot: Store) -> None:
            if node is loop:
                events.append((ev, snapshot))

        outcome = exec_stmt(triple.program, store, cfg.exec_fuel, hook)
        if not isinstance(outcome, Finished):
            stats.runs_skipped += 1
            continue
        current: LoopRun | None = None
        for ev, snapshot in events:
            if ev == "enter":
                current = LoopRun(entry=snapshot)
            elif ev == "iter" and current is not None:
                if current.pres:
                    current.posts.append(snapshot)
                current.pres.append(snapshot)
            elif ev == "exit" and current is not None:
                if current.pres:
                    current.posts.append(snapshot)
                current.exit = snapshot
                runs.append(current)
                current = None
    stats.runs_collected += len(runs)
    return runs


# ---------------------------------------------------------------------------
# Template enumeration


class _Templates:
    """Expression templates over `atoms`, grouped by size (1, 3, 5, 7 for
    depth ≤ 2), enumerated in order (size, operator, left, right)."""

    def __init__(self, atoms: list[Expr], cfg: SolverConfig):
        self.cfg = cfg
        self._by_size: dict[int, list[Expr]] = {1: list(atoms)}

    def sizes(self) -> list[int]:
        return [1, 3, 5, 7][: 2 * self.cfg.template_depth]

    def of_size(self, n: int) -> list[Expr]:
        if n not in self._by_size:
            ops = self.cfg.operator_pool
            out: list[Expr] = []
            if n == 3:
                a = self._by_size[1]
                out = [Op(op, (l, r)) for op in ops for l in a for r in a]
            elif n == 5:
                a, b = self.of_size(1), self.of_size(3)
                for op in ops:
                    out.extend(Op(op, (l, r)) for l in a for r in b)
                    out.extend(Op(op, (l, r)) for l in b for r in a)
            elif n == 7:
                b = self.of_size(3)
                out = [Op(op, (l, r)) for op in self.cfg.operator_pool for l in b for r in b]
            self._by_size[n] = out
        return self._by_size[n]

    def all(self, max_size: int | None = None):
        for n in self.sizes():
            if max_size is not None and n > max_size:
                return
            yield from self.of_size(n)


def _tuples(pools: list[_Templates], max_size: int | None = None):
    """Joint candidates, one expression per pool, ordered by total size
    then left-to-right lexicographically."""
    k = len(pools)
    sizes = pools[0].sizes() if pools else []
    if max_size is not None:
        sizes = [s for s in sizes if s <= max_size]
    for total in range(k, (sizes[-1] if sizes else 1) * k + 1):
        for combo in itertools.product(sizes, repeat=k):
            if sum(combo) != total:
                continue
            yield from itertools.product(*(p.of_size(s) for p, s in zip(pools, combo)))


def _atom_exprs(cfg: SolverConfig, names: list[str]) -> list[Expr]:
    return [Num(v) for v in cfg.literal_pool] + [Var(n) for n in names]


# ---------------------------------------------------------------------------
# Requirement checks used during search


@dataclass
class _Component:
    genvars: tuple[str, ...]
    conjuncts: list[Expr]


def _split_components(
    conjuncts: list[Expr], genvars: tuple[str, ...]
) -> tuple[list[_Component], list[Expr]]:
    parent = {g: g for g in genvars}

    def find(g: str) -> str:
        while parent[g] != g:
            parent[g] = parent[parent[g]]
            g = parent[g]
        return g

    per_conjunct: list[tuple[str, ...]] = []
    for c in conjuncts:
        present = tuple(g for g in genvars if g in free_vars(c))
        per_conjunct.append(present)
        for other in present[1:]:
            parent[find(other)] = find(present[0])

    base = [c for c, gs in zip(conjuncts, per_conjunct) if not gs]
    groups: dict[str, _Component] = {}
    for g in genvars:  # creation order
        root = find(g)
        groups.setdefault(root, _Component((), [])).genvars += (g,)
    for c, gs in zip(conjuncts, per_conjunct):
        if gs:
            groups[find(gs[0])].conjuncts.append(c)
    return list(groups.values()), base


def _holds_initially(
    comp: _Component, init: dict[str, Expr], entries: list[Store], stats: SolveStats
) -> bool:
    for entry in entries:
        try:
            gvals = {g: eval_expr(e, entry) for g, e in init.items()}
        except EvalError:
            stats.eval_rejections += 1
            return False
        env = {**entry, **gvals}
        stats.stores_tested += 1
        if not all(holds(c, env) for c in comp.conjuncts):
            return False
    return True


def _walks_trajectories(
    comp: _Component,
    init: dict[str, Expr],
    step: dict[str, Expr],
    runs: list[LoopRun],
    stats: SolveStats,
) -> bool:
    """Requirement 2 along collected runs.  Step evaluation errors
    truncate the run; a hard mismatch rejects; the candidate must
    validate at least one transition unless there are none at all."""
    validated = 0
    saw_transition = False
    for run in runs:
        gvals = {g: eval_expr(e, run.entry) for g, e in init.items()}
        for pre, post in run.transitions:
            saw_transition = True
            env_pre = {**pre, **gvals}
            if not all(holds(c, env_pre) for c in comp.conjuncts):
                break  # off the invariant; nothing to demand onward
            try:
                gvals = {g: eval_expr(e, env_pre) for g, e in step.items()}
            except EvalError:
                stats.step_truncations += 1
                break
            env_post = {**post, **gvals}
            stats.stores_tested += 1
            if not all(holds(c, env_post) for c in comp.conjuncts):
                return False
            validated += 1
    return validated > 0 or not saw_transition


def _implies_post(
    putative: Expr,
    genvars: tuple[str, ...],
    final: dict[str, Expr],
    loop: While,
    post: Expr,
    cfg: SolverConfig,
    stats: SolveStats,
) -> bool:
    """Requirement 3 by exhausting stores over the relevant variables."""
    inv = substitute(putative, dict(final))
    names = sorted(
        (free_vars(putative) - set(genvars))
        | free_vars(loop.cond)
        | free_vars(post)
        | set().union(*(free_vars(e) for e in final.values()))
    )
    exit_cond = Op("¬", (loop.cond,))
    for values in itertools.product(range(cfg.domain_bound + 1), repeat=len(names)):
        store = dict(zip(names, values))
        stats.stores_tested += 1
        if holds(inv, store) and holds(exit_cond, store) and not holds(post, store):
            return False
    return True


# ---------------------------------------------------------------------------
# Search


def _top_branch(body: Stmt) -> Expr | None:
    """Condition of the first top-level If on the body's statement spine."""
    match body:
        case If(cond, _, _):
            return cond
        case Seq(a, b):
            return _top_branch(a) or _top_branch(b)
        case Block(_, inner):
            return _top_branch(inner)
        case _:
            return None


def _conditional(cond: Expr, then: Expr, other: Expr) -> Expr:
    return Case(cond, (("True", 0, then), ("False", 0, other)))


class _Search:
    def __init__(
        self,
        triple: Triple,
        loop: While,
        putative: Expr,
        genvars: tuple[str, ...],
        cfg: SolverConfig,
        stats: SolveStats,
        runs: list[LoopRun],
    ):
        self.triple = triple
        self.loop = loop
        self.putative = putative
        self.genvars = genvars
        self.cfg = cfg
        self.stats = stats
        self.runs = runs
        self.entries = [r.entry for r in runs]
        self.prog_vars = sorted(program_vars(triple))
        self.branch_cond = _top_branch(loop.body)

    def _spend(self) -> None:
        self.stats.candidates_tried += 1
        if self.stats.candidates_tried > self.cfg.max_candidates:
            raise _Budget()

    def solve_component(self, comp: _Component) -> tuple[dict[str, Expr], dict[str, Expr]]:
        init_pool = _Templates(_atom_exprs(self.cfg, self.prog_vars), self.cfg)
        some_initial_held = False
        try:
            for init_tuple in _tuples([init_pool] * len(comp.genvars)):
                self._spend()
                init = dict(zip(comp.genvars, init_tuple))
                if not _holds_initially(comp, init, self.entries, self.stats):
                    continue
                some_initial_held = True
                step = self._find_step(comp, init)
                if step is not None:
                    return init, step
        except _Budget:
            raise SolverFailure(
                2 if some_initial_held else 1,
                f"template budget ({self.cfg.max_candidates}) exhausted while "
                f"searching component {comp.genvars}",
                self.stats,
            ) from None
        if some_initial_held:
            raise SolverFailure(
                2,
                f"initial values exist for {comp.genvars} but no step expression "
                "preserves the invariant along the observed iterations",
                self.stats,
            )
        raise SolverFailure(
            1,
            f"no initial values for {comp.genvars} satisfy the invariant on the "
            f"{len(self.entries)} collected entry stores",
            self.stats,
        )

    def _find_step(self, comp: _Component, init: dict[str, Expr]) -> dict[str, Expr] | None:
        conditional = self.branch_cond is not None and len(comp.genvars) == 1
        # With a branching body, cap unconditional templates so the
        # conditional stage is reachable within the budget.
        cap = 5 if conditional else None
        pools = [
            _Templates(_atom_exprs(self.cfg, self.prog_vars) + [Var(g)], self.cfg)
            for g in comp.genvars
        ]
        for tup in _tuples(pools, max_size=cap):
            self._spend()
            step = dict(zip(comp.genvars, tup))
            if _walks_trajectories(comp, init, step, self.runs, self.stats):
                return step
        if conditional:
            found = self._find_conditional_step(comp, init, pools[0])
            if found is not None:
                return found
        return None

    def _find_conditional_step(
        self, comp: _Component, init: dict[str, Expr], pool: _Templates
    ) -> dict[str, Expr] | None:
        g = comp.genvars[0]
        cond = self.branch_cond
        assert cond is not None

        # Viability prefilter on first transitions only, where the
        # generalisation variable's value is fixed by the initial.
        firsts: list[tuple[Store, Store, int]] = []
        for run in self.runs:
            if run.transitions:
                pre, post = run.transitions[0]
                firsts.append((pre, post, eval_expr(init[g], run.entry)))

        def viable(expr: Expr, want: bool) -> bool:
            for pre, post, g0 in firsts:
                if bool(eval_expr(cond, pre)) is not want:
                    continue
                env = {**pre, g: g0}
                if not all(holds(c, env) for c in comp.conjuncts):
                    continue
                try:
                    nxt = eval_expr(expr, env)
                except EvalError:
                    continue  # truncation, not refutation
                if not all(holds(c, {**post, g: nxt}) for c in comp.conjuncts):
                    return False
            return True

        cap = 400
        then_pool = list(itertools.islice((e for e in pool.all() if viable(e, True)), cap))
        else_pool = list(itertools.islice((e for e in pool.all() if viable(e, False)), cap))
        def by_size(exprs: list[Expr]) -> dict[int, list[Expr]]:
            return {s: [e for e in exprs if _size(e) == s] for s in pool.sizes()}

        thens, elses = by_size(then_pool), by_size(else_pool)
        for total in range(2, 2 * pool.sizes()[-1] + 1):
            for s1 in pool.sizes():
                s2 = total - s1
                if s2 not in elses:
                    continue
                for et, ee in itertools.product(thens[s1], elses[s2]):
                    self._spend()
                    step = {g: _conditional(cond, et, ee)}
                    if _walks_trajectories(comp, init, step, self.runs, self.stats):
                        return step
        return None

    def solve_finals(self, post: Expr) -> dict[str, Expr]:
        pool = _Templates(_atom_exprs(self.cfg, self.prog_vars), self.cfg)
        ordered = tuple(self.genvars)
        try:
            for tup in _tuples([pool] * len(ordered)):
                self._spend()
                final = dict(zip(ordered, tup))
                if _implies_post(
                    self.putative, self.genvars, final, self.loop, post, self.cfg, self.stats
                ):
                    return final
        except _Budget:
            raise SolverFailure(
                3,
                f"template budget ({self.cfg.max_candidates}) exhausted while searching finals",
                self.stats,
            ) from None
        raise SolverFailure(
            3,
            "no final values make the invariant plus the exit condition imply the postcondition",
            self.stats,
        )


def solve(
    triple: Triple,
    loop: While,
    putative: Expr,
    genvars: tuple[str, ...],
    post: Expr,
    cfg: SolverConfig | None = None,
) -> InvariantReport:
    """Find witnesses for `putative`'s generalisation variables on `loop`
    (a node of triple.program, compared by identity) against `post`, the
    postcondition the loop must establish.  Raises SolverFailure when the
    search space is exhausted; otherwise the returned report carries the
    independently re-checked verdict."""
    cfg = cfg or SolverConfig()
    stats = SolveStats()
    runs = collect_trajectories(triple, loop, cfg, stats)
    entries = [r.entry for r in runs]

    conjuncts = top_conjuncts(putative)
    components, base = _split_components(conjuncts, genvars)
    for c in base:
        for entry in entries:
            stats.stores_tested += 1
            if not holds(c, entry):
                raise SolverFailure(
                    1,
                    f"conjunct {pretty(c)} (no generalisation variables) fails on "
                    f"entry store {entry}",
                    stats,
                )

    search = _Search(triple, loop, putative, genvars, cfg, stats, runs)

    initial: dict[str, Expr] = {}
    step: dict[str, Expr] = {}
    for comp in components:
        comp_init, comp_step = search.solve_component(comp)
        initial.update(comp_init)
        step.update(comp_step)
    # Re-key in creation order for stable reporting.
    initial = {g: initial[g] for g in genvars}
    step = {g: step[g] for g in genvars}

    final = search.solve_finals(post) if genvars else {}
    assignment = Assignment(initial, step, final)
    verdict = check_requirements(triple, loop, putative, genvars, assignment, post, cfg)
    return InvariantReport(putative, genvars, assignment, verdict, stats)


def _size(e: Expr) -> int:
    match e:
        case Op(_, args):
            return 1 + sum(_size(a) for a in args)
        case _:
            return 1


def check_requirements(
    triple: Triple,
    loop: While,
    putative: Expr,
    genvars: tuple[str, ...],
    assignment: Assignment,
    post: Expr,
    cfg: SolverConfig | None = None,
    stats: SolveStats | None = None,
) -> Verdict:
    """Independent bounded check of the three invariant requirements for a
    concrete assignment; used both as the reported verdict behind solve()
    and directly on hand-written assignments."""
    cfg = cfg or SolverConfig()
    stats = stats if stats is not None else SolveStats()
    runs = collect_trajectories(triple, loop, cfg, stats)

    def as_failure(req: int, store: Store) -> Failed:
        return Failed(req, tuple(sorted(store.items())))

    # Requirement 1: initial instantiation holds whenever the loop is entered.
    inv_initial = substitute(putative, dict(assignment.initial))
    for run in runs:
        stats.stores_tested += 1
        if not holds(inv_initial, run.entry):
            return as_failure(1, run.entry)

    # Requirement 2: the step walks every observed iteration.
    for run in runs:
        try:
            gvals = {g: eval_expr(e, run.entry) for g, e in assignment.initial.items()}
        except EvalError:
            return as_failure(1, run.entry)
        for pre, post_store in run.transitions:
            env_pre = {**pre, **gvals}
            if not holds(putative, env_pre):
                break
            try:
                gvals = {g: eval_expr(e, env_pre) for g, e in assignment.step.items()}
            except EvalError:
                stats.step_truncations += 1
                break
            stats.stores_tested += 1
            if not holds(putative, {**post_store, **gvals}):
                return as_failure(2, env_pre)

    # Requirement 3: final instantiation plus exit condition implies the post.
    inv_final = substitute(putative, dict(assignment.final))
    names = sorted(
        (free_vars(putative) - set(genvars))
        | free_vars(loop.cond)
        | free_vars(post)
        | (set().union(*(free_vars(e) for e in assignment.final.values())) if assignment.final else set())
    )
    exit_cond = Op("¬", (loop.cond,))
    for values in itertools.product(range(cfg.domain_bound + 1), repeat=len(names)):
        store = dict(zip(names, values))
        stats.stores_tested += 1
        if holds(inv_final, store) and holds(exit_cond, store) and not holds(post, store):
            return as_failure(3, store)
    return VerifiedUpToBound(cfg.domain_bound)


def diagnose_lost_variables(putative: Expr, body: Stmt) -> tuple[str, ...]:
    """Body-assigned variables missing from the invariant, in first-
    assignment order.  A non-empty result usually means generalisation
    swallowed the variable's update (it only ever appeared as part of a
    larger subterm), so no witness search can succeed."""
    order: list[str] = []

    def walk(st: Stmt) -> None:
        match st:
            case Assign(var, _):
                if var not in order:
                    order.append(var)
            case Seq(a, b):
                walk(a)
                walk(b)
            case If(_, t, e):
                walk(t)
                walk(e)
            case Block(_, inner):
                walk(inner)
            case While(_, inner):
                walk(inner)
            case _:
                pass

    walk(body)
    mentioned = free_vars(putative)
    return tuple(v for v in order if v not in mentioned)
