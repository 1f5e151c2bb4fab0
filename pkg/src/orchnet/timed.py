"""Timed execution of occurrence nets under the race policy.

An OrchNet attaches to each transition a latency function, a value function,
and optionally a guard, plus initial-date functions for minimal places.
Nondeterminism (in latencies, values, initial dates) is resolved by a daemon
index ``omega`` ranging over ``range(omega_count)``.

Token propagation: a transition's output value is its value function applied
to the preset token values; its date is the max of the preset dates plus its
latency.  A false guard makes the date infinite, which means the transition
never occurs.

The race policy repeatedly fires, among the transitions enabled at the
current cut, one with the smallest date.  Ties are resolved by the declared
policy: lexicographic (deterministic default) or enumeration of every
distinct resolution.  A run whose remaining enabled transitions all have
infinite dates stops there: the fired prefix is the occurring configuration,
the run is flagged stalled, and the end-to-end latency is infinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .attributes import DATE_INF, DATE_ZERO, ExtendedDate, Value, atom, date_max
from .errors import CapExceededError, EvaluationError, NetStructureError
from .nets import (
    Net,
    NodeRelations,
    configuration_of,
    is_causally_closed,
    is_conflict_free,
    maximal_transitions,
    require_occurrence_net,
)
from .specs import GuardSpec, LatencySpec, ValueFnSpec


@dataclass(frozen=True)
class OrchNet:
    """An occurrence net with value, latency, guard, and initial-date specs."""

    net: Net
    latency: dict[str, LatencySpec]
    value_fn: dict[str, ValueFnSpec]
    initial_date: dict[str, LatencySpec]
    omega_count: int = 1
    guard: dict[str, GuardSpec] = field(default_factory=dict)
    initial_value: dict[str, Value] = field(default_factory=dict)

    def __post_init__(self) -> None:
        rel = require_occurrence_net(self.net)
        object.__setattr__(self, "_relations", rel)
        missing = sorted(self.net.transitions - set(self.latency))
        if missing:
            raise NetStructureError(f"transitions without latency specs: {missing}")
        missing = sorted(self.net.transitions - set(self.value_fn))
        if missing:
            raise NetStructureError(f"transitions without value functions: {missing}")
        missing = sorted(self.net.minimal_places - set(self.initial_date))
        if missing:
            raise NetStructureError(f"minimal places without initial dates: {missing}")
        if self.omega_count < 1:
            raise NetStructureError("omega_count must be at least 1")
        for p in self.net.minimal_places:
            if p not in self.initial_value:
                self.initial_value[p] = atom(p)

    @property
    def relations(self) -> NodeRelations:
        return self._relations  # type: ignore[attr-defined]

    def check_omega(self, omega: int) -> None:
        if not 0 <= omega < self.omega_count:
            raise EvaluationError(f"omega {omega} outside range(0, {self.omega_count})")

    def inputs_of(self, t: str, values: dict[str, Value]) -> tuple[Value, ...]:
        """Preset token values, ordered by sorted preset place id."""
        return tuple(values[p] for p in sorted(self.net.preset[t]))

    def transition_date(
        self, t: str, omega: int, dates: dict[str, ExtendedDate], values: dict[str, Value]
    ) -> tuple[ExtendedDate, Value]:
        inputs = self.inputs_of(t, values)
        out_value = self.value_fn[t].evaluate(omega, inputs)
        guard = self.guard.get(t)
        if guard is not None and not guard.evaluate(inputs):
            return DATE_INF, out_value
        delay = self.latency[t].evaluate(omega, inputs)
        base = date_max(dates[p] for p in self.net.preset[t])
        return base + delay, out_value


@dataclass(frozen=True)
class PrefixEvaluation:
    dates: dict[str, ExtendedDate]
    values: dict[str, Value]


def eval_dates(orch: OrchNet, omega: int, prefix: frozenset[str]) -> PrefixEvaluation:
    """Evaluate dates and values over a causally closed, conflict-free prefix.

    Pure structural evaluation: minimal places take their initial dates,
    other places copy their producer, transitions take max of preset dates
    plus latency (infinite on a false guard).
    """
    orch.check_omega(omega)
    net, rel = orch.net, orch.relations
    if not prefix <= net.nodes:
        raise NetStructureError(f"prefix contains unknown nodes: {sorted(prefix - net.nodes)}")
    if not is_causally_closed(net, rel, prefix):
        bad = sorted(n for n in prefix if not rel.below[n] <= prefix)
        raise NetStructureError(f"prefix is not causally closed at {bad}")
    if not is_conflict_free(rel, prefix):
        raise NetStructureError("prefix is not conflict-free")

    dates: dict[str, ExtendedDate] = {}
    values: dict[str, Value] = {}
    for node in sorted(prefix, key=lambda n: (len(rel.below[n] & prefix), n)):
        if node in net.places:
            producers = net.preset[node] & prefix
            if producers:
                (producer,) = tuple(producers)
                dates[node] = dates[producer]
                values[node] = values[producer]
            else:
                if node not in orch.initial_date:
                    raise NetStructureError(f"place {node!r} has no initial date in this prefix")
                dates[node] = orch.initial_date[node].value_at(omega)
                values[node] = orch.initial_value[node]
        else:
            if not net.preset[node] <= prefix:
                raise NetStructureError(f"prefix cuts the preset of transition {node!r}")
            d, v = orch.transition_date(node, omega, dates, values)
            dates[node] = d
            values[node] = v
    return PrefixEvaluation(dates=dates, values=values)


def latency_of_prefix(orch: OrchNet, omega: int, prefix: frozenset[str]) -> ExtendedDate:
    """Max date over the prefix; the empty prefix yields 0 by convention."""
    if not prefix:
        return DATE_ZERO
    ev = eval_dates(orch, omega, prefix)
    return date_max(ev.dates.values())


@dataclass(frozen=True)
class Step:
    fired: str
    date: ExtendedDate
    candidates: tuple[tuple[str, ExtendedDate], ...]


@dataclass(frozen=True)
class TimedRun:
    omega: int
    occurring: frozenset[str]
    dates: dict[str, ExtendedDate]
    values: dict[str, Value]
    step_order: tuple[str, ...]
    steps: tuple[Step, ...]
    tie_events: tuple[frozenset[str], ...]
    stalled: bool

    @property
    def fired(self) -> frozenset[str]:
        return frozenset(self.step_order)


def _run_race(
    orch: OrchNet,
    omega: int,
    choose,
) -> list[TimedRun]:
    """Race-policy execution core.

    ``choose(tied)`` maps the set of minimal-date enabled transitions to the
    list of transitions to branch on (one element for deterministic modes).
    Returns one TimedRun per distinct occurring configuration.
    """
    net = orch.net

    init_dates = {p: orch.initial_date[p].value_at(omega) for p in net.minimal_places}
    init_values = {p: orch.initial_value[p] for p in net.minimal_places}

    runs: dict[frozenset[str], TimedRun] = {}

    def finish(fired, dates, values, steps, ties):
        occ = configuration_of(net, frozenset(fired))
        stalled = _has_open_future(orch, frozenset(fired))
        key = frozenset(fired)
        if key not in runs:
            runs[key] = TimedRun(
                omega=omega,
                occurring=occ,
                dates={n: dates[n] for n in occ},
                values={n: values[n] for n in occ},
                step_order=tuple(fired),
                steps=tuple(steps),
                tie_events=tuple(ties),
                stalled=stalled,
            )

    def explore(fired: list[str], marked: set[str], dates: dict[str, ExtendedDate], values: dict[str, Value], steps, ties):
        # enabled = unfired transitions whose whole preset is currently marked;
        # dates/values accumulate every node touched so far
        candidates: list[tuple[str, ExtendedDate, Value]] = []
        fired_set = set(fired)
        for t in sorted(net.transitions - fired_set):
            pre = net.preset[t]
            if not pre <= marked:
                continue
            d, v = orch.transition_date(t, omega, dates, values)
            candidates.append((t, d, v))
        finite = [(t, d, v) for (t, d, v) in candidates if d.is_finite]
        if not finite:
            finish(fired, dict(dates), dict(values), steps, ties)
            return
        best = min(d for _, d, _ in finite)
        tied = [(t, d, v) for (t, d, v) in finite if d == best]
        tied_names = frozenset(t for t, _, _ in tied)
        new_ties = ties + [tied_names] if len(tied) > 1 else ties
        step_candidates = tuple((t, d) for t, d, _ in candidates)
        for t in choose([t for t, _, _ in tied]):
            d, v = next((d, v) for (tt, d, v) in tied if tt == t)
            next_dates = dict(dates)
            next_values = dict(values)
            next_dates[t] = d
            next_values[t] = v
            for p in net.postset[t]:
                next_dates[p] = d
                next_values[p] = v
            explore(
                fired + [t],
                (marked - net.preset[t]) | net.postset[t],
                next_dates,
                next_values,
                steps + [Step(fired=t, date=d, candidates=step_candidates)],
                new_ties,
            )

    explore([], set(net.minimal_places), dict(init_dates), dict(init_values), [], [])
    ordered = sorted(runs.values(), key=lambda r: tuple(sorted(r.occurring)))
    return ordered


def _has_open_future(orch: OrchNet, fired: frozenset[str]) -> bool:
    """True when some unfired transition is not in conflict with the fired
    prefix, i.e. the occurring configuration is not maximal."""
    net, rel = orch.net, orch.relations
    occ = configuration_of(net, fired)
    for t in sorted(net.transitions - fired):
        if all(not rel.in_conflict(t, n) for n in occ):
            return True
    return False


def execute(orch: OrchNet, omega: int, tie_break: str = "lex") -> TimedRun:
    """Run the race policy with a deterministic tie policy ("lex")."""
    orch.check_omega(omega)
    if tie_break != "lex":
        raise EvaluationError(f"unknown tie_break {tie_break!r} (use execute_all for enumeration)")
    runs = _run_race(orch, omega, lambda tied: [min(tied)])
    assert len(runs) == 1
    return runs[0]


def execute_all(orch: OrchNet, omega: int, cap: int = 10_000) -> tuple[TimedRun, ...]:
    """Enumerate every distinct tie resolution (deduped by occurring
    configuration; permuting tied concurrent transitions changes nothing)."""
    orch.check_omega(omega)
    counter = {"branches": 0}

    def choose(tied: list[str]) -> list[str]:
        counter["branches"] += len(tied)
        if counter["branches"] > cap:
            raise CapExceededError(f"tie enumeration exceeded cap {cap}")
        return sorted(tied)

    return tuple(_run_race(orch, omega, choose))


@dataclass(frozen=True)
class EndToEnd:
    latency: ExtendedDate
    values: frozenset[Value]
    run: TimedRun


def end_to_end(orch: OrchNet, omega: int, tie_break: str = "lex") -> EndToEnd:
    """End-to-end latency and the value set of the occurring configuration.

    A stalled run (every remaining enabled transition has an infinite date)
    reports infinite latency; the value set always comes from the maximal
    transitions that actually occurred.
    """
    run = execute(orch, omega, tie_break)
    return summarize_run(orch, run)


def summarize_run(orch: OrchNet, run: TimedRun) -> EndToEnd:
    if run.stalled:
        total = DATE_INF
    else:
        total = date_max(run.dates.values())
    return EndToEnd(latency=total, values=run_values(orch, run), run=run)


def run_values(orch: OrchNet, run: TimedRun) -> frozenset[Value]:
    maxts = maximal_transitions(orch.net, orch.relations, run.occurring)
    return frozenset(run.values[t] for t in maxts)


def values_of_configuration(orch: OrchNet, omega: int, config: frozenset[str]) -> frozenset[Value]:
    """Value set of an arbitrary configuration (used on maximal configurations)."""
    ev = eval_dates(orch, omega, config)
    maxts = maximal_transitions(orch.net, orch.relations, config)
    return frozenset(ev.values[t] for t in maxts)


# ---------------------------------------------------------------------------
# Futures


def future(orch: OrchNet, kappa: frozenset[str], omega: int) -> OrchNet:
    """The net that remains after the prefix ``kappa`` has occurred.

    Nodes inside kappa (except its maximal places) and nodes in conflict
    with kappa are removed.  Kappa's maximal places become minimal places of
    the result, carrying their computed dates and values as initial data.
    Minimal places of the original net outside kappa keep their own specs.
    """
    net, rel = orch.net, orch.relations
    if not kappa:
        return orch
    for t in sorted(kappa & net.transitions):
        if not net.postset[t] <= kappa:
            raise NetStructureError(
                f"prefix must close over postsets (maximal nodes are places); {t!r} is cut"
            )
    ev = eval_dates(orch, omega, kappa)

    max_places = frozenset(
        p for p in kappa & net.places if not (rel.above[p] & kappa)
    )
    interior = kappa - max_places
    blocked = {
        n
        for n in net.nodes - kappa
        if any(rel.in_conflict(n, k) for k in kappa)
    }
    keep = (net.nodes - interior - blocked) | max_places

    places = net.places & keep
    transitions = net.transitions & keep
    flow = frozenset(
        (a, b)
        for (a, b) in net.flow
        if a in keep and b in keep and not (b in max_places)
    )
    sub = Net(
        places=places,
        transitions=transitions,
        flow=flow,
        initial_marking=frozenset(
            p for p in places if not any(src in keep for (src, dst) in net.flow if dst == p)
        ) | max_places,
    )

    initial_date: dict[str, LatencySpec] = {}
    initial_value: dict[str, Value] = {}
    for p in sub.minimal_places:
        if p in max_places:
            initial_date[p] = LatencySpec(kind="const", const=ev.dates[p]) if ev.dates[p].is_finite else LatencySpec(kind="infinite")
            initial_value[p] = ev.values[p]
        else:
            initial_date[p] = orch.initial_date[p]
            initial_value[p] = orch.initial_value[p]

    return OrchNet(
        net=sub,
        latency={t: orch.latency[t] for t in transitions},
        value_fn={t: orch.value_fn[t] for t in transitions},
        initial_date=initial_date,
        omega_count=orch.omega_count,
        guard={t: g for t, g in orch.guard.items() if t in transitions},
        initial_value=initial_value,
    )


# ---------------------------------------------------------------------------
# Family order


@dataclass(frozen=True)
class FamilyOrder:
    geq: bool
    witness: tuple[str, ...] = field(default=())
    reason: str = ""


def compare_families(a: OrchNet, b: OrchNet) -> FamilyOrder:
    """Decide whether the families of ``a`` dominate those of ``b``:
    for every omega, every transition latency and every initial date of
    ``a`` is >= the corresponding one of ``b``.

    Tabular specs (const / per-omega / infinite) are compared exactly.
    Expression latencies are only comparable when syntactically equal:
    deciding pointwise inequality of expressions is out of scope.
    """
    if a.net.nodes != b.net.nodes or a.net.flow != b.net.flow:
        return FamilyOrder(geq=False, reason="nets differ")
    if a.omega_count != b.omega_count:
        return FamilyOrder(geq=False, reason="omega domains differ")

    for t in sorted(a.net.transitions):
        verdict = _spec_geq(a.latency[t], b.latency[t], a.omega_count)
        if verdict is not True:
            return FamilyOrder(
                geq=False,
                witness=(("omega=%d" % verdict) if isinstance(verdict, int) else "spec", t),
                reason=f"latency of {t!r} is not dominating",
            )
    for p in sorted(a.net.minimal_places):
        verdict = _spec_geq(a.initial_date[p], b.initial_date[p], a.omega_count)
        if verdict is not True:
            return FamilyOrder(
                geq=False,
                witness=(("omega=%d" % verdict) if isinstance(verdict, int) else "spec", p),
                reason=f"initial date of {p!r} is not dominating",
            )
    return FamilyOrder(geq=True)


def _spec_geq(hi: LatencySpec, lo: LatencySpec, omega_count: int):
    """True, or the offending omega index, or "spec" for incomparable specs."""
    if hi.is_tabular() and lo.is_tabular():
        for omega in range(omega_count):
            if hi.value_at(omega) < lo.value_at(omega):
                return omega
        return True
    if hi == lo:
        return True
    return "spec"


# ---------------------------------------------------------------------------
# Pre-orchnets: finite family sets over grids


@dataclass(frozen=True)
class FamilyAssignment:
    """One member of a grid family: a constant per latency class and per
    minimal place (None means "keep the declared spec")."""

    class_values: tuple[tuple[str, ExtendedDate | None], ...]
    place_values: tuple[tuple[str, ExtendedDate | None], ...]

    def sort_key(self):
        return (
            tuple((c, v is None, str(v)) for c, v in self.class_values),
            tuple((p, v is None, str(v)) for p, v in self.place_values),
        )

    def dominates(self, other: "FamilyAssignment") -> bool:
        for (c, v), (c2, v2) in zip(self.class_values, other.class_values):
            assert c == c2
            if v is None and v2 is None:
                continue
            if v is None or v2 is None or v < v2:
                return False
        for (p, v), (p2, v2) in zip(self.place_values, other.place_values):
            assert p == p2
            if v is None and v2 is None:
                continue
            if v is None or v2 is None or v < v2:
                return False
        return True


@dataclass(frozen=True)
class PreOrchNet:
    """An OrchNet schema whose latencies/initial dates range over finite
    per-class candidate grids instead of being fixed."""

    net: Net
    value_fn: dict[str, ValueFnSpec]
    classes: dict[str, frozenset[str]]  # class id -> transitions
    class_spec: dict[str, LatencySpec]  # declared latency per class
    class_grid: dict[str, tuple[ExtendedDate, ...]]  # optional per class
    initial_date: dict[str, LatencySpec]
    place_grid: dict[str, tuple[ExtendedDate, ...]]
    omega_count: int = 1
    guard: dict[str, GuardSpec] = field(default_factory=dict)
    initial_value: dict[str, Value] = field(default_factory=dict)
    upward_closed: bool = False

    def __post_init__(self) -> None:
        covered = set()
        for cls, members in self.classes.items():
            if cls not in self.class_spec:
                raise NetStructureError(f"class {cls!r} has no declared latency spec")
            if covered & members:
                raise NetStructureError(f"class {cls!r} overlaps another class")
            covered |= members
        missing = sorted(self.net.transitions - covered)
        if missing:
            raise NetStructureError(f"transitions not covered by any latency class: {missing}")
        for cls in self.class_grid:
            if cls not in self.classes:
                raise NetStructureError(f"grid declared for unknown class {cls!r}")
        for p in self.place_grid:
            if p not in self.net.minimal_places:
                raise NetStructureError(f"grid declared for non-minimal place {p!r}")

    def class_of(self, t: str) -> str:
        for cls, members in self.classes.items():
            if t in members:
                return cls
        raise NetStructureError(f"transition {t!r} has no latency class")

    def assignments(self) -> tuple[FamilyAssignment, ...]:
        """Every grid member, in canonical order."""
        class_ids = sorted(self.classes)
        place_ids = sorted(self.net.minimal_places)
        options_per_class = [
            [(c, v) for v in self.class_grid[c]] if c in self.class_grid else [(c, None)]
            for c in class_ids
        ]
        options_per_place = [
            [(p, v) for v in self.place_grid[p]] if p in self.place_grid else [(p, None)]
            for p in place_ids
        ]
        members: list[FamilyAssignment] = []

        def expand(option_lists, prefix, out):
            if not option_lists:
                out.append(tuple(prefix))
                return
            for opt in option_lists[0]:
                expand(option_lists[1:], prefix + [opt], out)

        class_combos: list[tuple] = []
        expand(options_per_class, [], class_combos)
        place_combos: list[tuple] = []
        expand(options_per_place, [], place_combos)
        for cc in class_combos:
            for pc in place_combos:
                members.append(FamilyAssignment(class_values=cc, place_values=pc))
        members.sort(key=lambda m: m.sort_key())
        return tuple(members)

    def instantiate(self, assignment: FamilyAssignment) -> OrchNet:
        latency: dict[str, LatencySpec] = {}
        chosen = dict(assignment.class_values)
        for cls, members in self.classes.items():
            spec = self.class_spec[cls]
            v = chosen.get(cls)
            if v is not None:
                spec = LatencySpec(kind="const", const=v) if v.is_finite else LatencySpec(kind="infinite")
            for t in members:
                latency[t] = spec
        initial_date = dict(self.initial_date)
        for p, v in assignment.place_values:
            if v is not None:
                initial_date[p] = LatencySpec(kind="const", const=v) if v.is_finite else LatencySpec(kind="infinite")
        return OrchNet(
            net=self.net,
            latency=latency,
            value_fn=dict(self.value_fn),
            initial_date=initial_date,
            omega_count=self.omega_count,
            guard=dict(self.guard),
            initial_value=dict(self.initial_value),
        )

    def baseline(self) -> OrchNet:
        """The member using every declared spec unchanged."""
        class_ids = sorted(self.classes)
        place_ids = sorted(self.net.minimal_places)
        return self.instantiate(
            FamilyAssignment(
                class_values=tuple((c, None) for c in class_ids),
                place_values=tuple((p, None) for p in place_ids),
            )
        )

    def member_count(self) -> int:
        n = 1
        for c in sorted(self.classes):
            n *= len(self.class_grid.get(c, ())) or 1
        for p in sorted(self.net.minimal_places):
            n *= len(self.place_grid.get(p, ())) or 1
        return n


def replace_class_latency(pre: PreOrchNet, cls: str, spec: LatencySpec) -> PreOrchNet:
    """A copy of the pre-orchnet with one class's declared latency replaced."""
    new_spec = dict(pre.class_spec)
    new_spec[cls] = spec
    return replace(pre, class_spec=new_spec)
