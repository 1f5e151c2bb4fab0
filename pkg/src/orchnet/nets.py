"""Structural net core: safe nets, occurrence-net relations, clusters,
configurations, and workflow-net soundness.

Node identifiers are opaque strings; everywhere a deterministic order is
needed, lexicographic order on ids is used.  Markings of safe nets are sets
of places.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .errors import CapExceededError, NetStructureError


@dataclass(frozen=True)
class Net:
    """A place/transition net with arc set ``flow`` and initial marking."""

    places: frozenset[str]
    transitions: frozenset[str]
    flow: frozenset[tuple[str, str]]
    initial_marking: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.places & self.transitions
        if overlap:
            raise NetStructureError(f"ids used as both place and transition: {sorted(overlap)}")
        nodes = self.places | self.transitions
        for src, dst in self.flow:
            if src not in nodes or dst not in nodes:
                raise NetStructureError(f"arc ({src!r}, {dst!r}) references unknown node")
            if (src in self.places) == (dst in self.places):
                raise NetStructureError(f"arc ({src!r}, {dst!r}) is not place<->transition")
        if not self.initial_marking <= self.places:
            extra = self.initial_marking - self.places
            raise NetStructureError(f"initial marking references unknown places: {sorted(extra)}")

    @cached_property
    def nodes(self) -> frozenset[str]:
        return self.places | self.transitions

    @cached_property
    def preset(self) -> dict[str, frozenset[str]]:
        pre: dict[str, set[str]] = {n: set() for n in self.nodes}
        for src, dst in self.flow:
            pre[dst].add(src)
        return {n: frozenset(s) for n, s in pre.items()}

    @cached_property
    def postset(self) -> dict[str, frozenset[str]]:
        post: dict[str, set[str]] = {n: set() for n in self.nodes}
        for src, dst in self.flow:
            post[src].add(dst)
        return {n: frozenset(s) for n, s in post.items()}

    @cached_property
    def minimal_places(self) -> frozenset[str]:
        return frozenset(p for p in self.places if not self.preset[p])

    @cached_property
    def maximal_places(self) -> frozenset[str]:
        return frozenset(p for p in self.places if not self.postset[p])

    def is_acyclic(self) -> bool:
        return _cycle_node(self) is None


def net_from_arcs(
    transitions: dict[str, tuple[tuple[str, ...], tuple[str, ...]]],
    places: tuple[str, ...] = (),
    marking: tuple[str, ...] | None = None,
) -> Net:
    """Build a net from {transition: (preset, postset)}.

    Places are collected from the arcs plus any explicitly listed extras.
    With ``marking=None`` the initial marking defaults to the minimal places.
    """
    place_set = set(places)
    flow = set()
    for t, (pre, post) in transitions.items():
        for p in pre:
            place_set.add(p)
            flow.add((p, t))
        for p in post:
            place_set.add(p)
            flow.add((t, p))
    if marking is None:
        produced = {p for _, (_, post) in transitions.items() for p in post}
        marking = tuple(p for p in place_set if p not in produced)
    return Net(
        places=frozenset(place_set),
        transitions=frozenset(transitions),
        flow=frozenset(flow),
        initial_marking=frozenset(marking),
    )


def _cycle_node(net: Net) -> str | None:
    """Return a node on some directed flow cycle, or None."""
    color: dict[str, int] = {}
    post = net.postset

    for start in sorted(net.nodes):
        if color.get(start):
            continue
        stack = [(start, iter(sorted(post[start])))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                c = color.get(nxt, 0)
                if c == 1:
                    return nxt
                if c == 0:
                    color[nxt] = 1
                    stack.append((nxt, iter(sorted(post[nxt]))))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
    return None


# ---------------------------------------------------------------------------
# Causality, conflict, concurrency


@dataclass(frozen=True)
class NodeRelations:
    """Precomputed order and conflict structure of an acyclic net.

    ``below[x]`` is the strict causal past of x (every node on a flow path
    into x).  Conflict is derived on demand from ``conflict_base``, the pairs
    of distinct transitions sharing a preset place.
    """

    net: Net
    below: dict[str, frozenset[str]]
    conflict_base: frozenset[frozenset[str]]

    @cached_property
    def above(self) -> dict[str, frozenset[str]]:
        up: dict[str, set[str]] = {n: set() for n in self.net.nodes}
        for node, past in self.below.items():
            for p in past:
                up[p].add(node)
        return {n: frozenset(s) for n, s in up.items()}

    def lt(self, x: str, y: str) -> bool:
        return x in self.below[y]

    def leq(self, x: str, y: str) -> bool:
        return x == y or x in self.below[y]

    def cone(self, x: str) -> frozenset[str]:
        """[x]: the causal past of x, x included."""
        return self.below[x] | {x}

    def in_conflict(self, x: str, y: str) -> bool:
        ts = self.net.transitions
        xt = (self.below[x] | {x}) & ts
        yt = (self.below[y] | {y}) & ts
        for pair in self.conflict_base:
            a, b = tuple(pair)
            if (a in xt and b in yt) or (b in xt and a in yt):
                return True
        return False

    def self_conflicts(self) -> frozenset[str]:
        """Nodes x with x # x (two conflicting transitions in their past)."""
        bad: set[str] = set()
        for pair in self.conflict_base:
            a, b = tuple(pair)
            shared = (self.above[a] | {a}) & (self.above[b] | {b})
            bad |= shared
        return frozenset(bad)

    def relation(self, x: str, y: str) -> str:
        """One of "eq", "lt", "gt", "conflict", "concurrent"."""
        if x == y:
            return "eq"
        if self.lt(x, y):
            return "lt"
        if self.lt(y, x):
            return "gt"
        if self.in_conflict(x, y):
            return "conflict"
        return "concurrent"


def compute_relations(net: Net) -> NodeRelations:
    """Causality/conflict structure; requires an acyclic flow graph."""
    cyc = _cycle_node(net)
    if cyc is not None:
        raise NetStructureError(f"flow graph has a cycle through {cyc!r}")
    order = _topological_order(net)
    below: dict[str, frozenset[str]] = {}
    for node in order:
        past: set[str] = set()
        for parent in net.preset[node]:
            past.add(parent)
            past |= below[parent]
        below[node] = frozenset(past)
    base = set()
    for p in net.places:
        consumers = sorted(net.postset[p])
        for i, a in enumerate(consumers):
            for b in consumers[i + 1 :]:
                base.add(frozenset((a, b)))
    return NodeRelations(net=net, below=below, conflict_base=frozenset(base))


def _topological_order(net: Net) -> list[str]:
    indeg = {n: len(net.preset[n]) for n in net.nodes}
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in sorted(net.postset[node]):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                # insertion keeps 'ready' sorted; sizes here are small
                ready.append(nxt)
                ready.sort()
    if len(order) != len(net.nodes):
        raise NetStructureError("flow graph has a cycle")
    return order


# ---------------------------------------------------------------------------
# Occurrence-net validation


@dataclass(frozen=True)
class Diagnostic:
    condition: str
    witness: tuple[str, ...]
    message: str


@dataclass(frozen=True)
class OccurrenceCheck:
    ok: bool
    diagnostics: tuple[Diagnostic, ...]


def validate_occurrence_net(net: Net) -> OccurrenceCheck:
    """Check the four occurrence-net conditions, reporting every violation.

    Conditions: no self-conflict; causality is a partial order (acyclic
    flow); at most one producer per place; the initial marking is exactly
    the set of minimal places.
    """
    diags: list[Diagnostic] = []

    cyc = _cycle_node(net)
    if cyc is not None:
        diags.append(
            Diagnostic(
                condition="partial_order",
                witness=(cyc,),
                message=f"flow graph has a cycle through {cyc!r}",
            )
        )

    for p in sorted(net.places):
        producers = net.preset[p]
        if len(producers) > 1:
            diags.append(
                Diagnostic(
                    condition="unique_producer",
                    witness=(p, *sorted(producers)),
                    message=f"place {p!r} has {len(producers)} producers",
                )
            )

    minimal = frozenset(p for p in net.places if not net.preset[p])
    if net.initial_marking != minimal:
        missing = sorted(minimal - net.initial_marking)
        extra = sorted(net.initial_marking - minimal)
        diags.append(
            Diagnostic(
                condition="initial_marking",
                witness=tuple(missing + extra),
                message=f"initial marking must equal the minimal places (missing {missing}, extra {extra})",
            )
        )

    if cyc is None:
        rel = compute_relations(net)
        for x in sorted(rel.self_conflicts()):
            diags.append(
                Diagnostic(
                    condition="no_self_conflict",
                    witness=(x,),
                    message=f"node {x!r} is in conflict with itself",
                )
            )

    return OccurrenceCheck(ok=not diags, diagnostics=tuple(diags))


@lru_cache(maxsize=512)
def _validated_relations(net: Net) -> NodeRelations:
    check = validate_occurrence_net(net)
    if not check.ok:
        msgs = "; ".join(d.message for d in check.diagnostics)
        raise NetStructureError(f"not an occurrence net: {msgs}")
    return compute_relations(net)


def require_occurrence_net(net: Net) -> NodeRelations:
    # memoized: family members share one net, so validation and the
    # relation tables are computed once per net, not once per member
    return _validated_relations(net)


# ---------------------------------------------------------------------------
# Clusters


@dataclass(frozen=True)
class Cluster:
    nodes: frozenset[str]
    transitions: frozenset[str]
    places: frozenset[str]


def clusters(net: Net) -> tuple[Cluster, ...]:
    """Partition the nodes into minimal closed sets.

    A set is closed when it contains the preset of each of its transitions
    and every consumer of each of its places.  Since "p in preset of t" and
    "t consumes p" are the same arcs read both ways, the minimal closed sets
    are the connected components of the place-to-consumer incidence graph.
    Components without transitions are degenerate (unconsumed places).
    """
    parent: dict[str, str] = {n: n for n in net.nodes}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for t in net.transitions:
        for p in net.preset[t]:
            union(p, t)

    groups: dict[str, set[str]] = {}
    for n in net.nodes:
        groups.setdefault(find(n), set()).add(n)

    result = []
    for members in groups.values():
        ms = frozenset(members)
        result.append(
            Cluster(
                nodes=ms,
                transitions=ms & net.transitions,
                places=ms & net.places,
            )
        )
    result.sort(key=lambda c: min(c.nodes))
    return tuple(result)


# ---------------------------------------------------------------------------
# Configurations


def is_causally_closed(net: Net, rel: NodeRelations, nodes: frozenset[str]) -> bool:
    return all(rel.below[n] <= nodes for n in nodes)


def is_conflict_free(rel: NodeRelations, nodes: frozenset[str]) -> bool:
    ts = sorted(nodes & rel.net.transitions)
    for i, a in enumerate(ts):
        for b in ts[i + 1 :]:
            if frozenset((a, b)) in rel.conflict_base:
                return False
    # base pairs inside the causal past are already covered: a configuration
    # is causally closed, so conflicting ancestors would both be members
    return True


def is_configuration(net: Net, rel: NodeRelations, nodes: frozenset[str]) -> bool:
    """Causally closed, conflict free, and maximal nodes are places."""
    if not nodes <= net.nodes:
        return False
    if not is_causally_closed(net, rel, nodes):
        return False
    if not is_conflict_free(rel, nodes):
        return False
    for t in nodes & net.transitions:
        if not net.postset[t] <= nodes:
            return False
    return True


def configuration_of(net: Net, fired: frozenset[str]) -> frozenset[str]:
    """The configuration spanned by a downward-closed set of transitions:
    their pre/postsets plus every minimal place."""
    nodes = set(net.minimal_places)
    for t in fired:
        nodes.add(t)
        nodes |= net.preset[t]
        nodes |= net.postset[t]
    return frozenset(nodes)


def maximal_transitions(net: Net, rel: NodeRelations, nodes: frozenset[str]) -> frozenset[str]:
    """Transitions of the set with no later transition inside the set."""
    ts = nodes & net.transitions
    return frozenset(t for t in ts if not (rel.above[t] & ts))


def maximal_configurations(
    net: Net,
    rel: NodeRelations | None = None,
    cap: int = 100_000,
) -> tuple[frozenset[str], ...]:
    """All maximal configurations, as node sets, in deterministic order.

    Explores include/exclude branches over enabled transitions; every leaf is
    checked for maximality directly, so over-approximating branches cannot
    leak non-maximal results.  Raises CapExceededError if the search visits
    more than ``cap`` branch points.
    """
    if rel is None:
        rel = require_occurrence_net(net)

    conflict_with: dict[str, set[str]] = {t: set() for t in net.transitions}
    for pair in rel.conflict_base:
        a, b = tuple(pair)
        conflict_with[a].add(b)
        conflict_with[b].add(a)

    def enabled(fired: frozenset[str], banned: frozenset[str]) -> list[str]:
        out = []
        for t in sorted(net.transitions - fired - banned):
            if any(u in fired for u in conflict_with[t]):
                continue
            producers = {next(iter(net.preset[p])) for p in net.preset[t] if net.preset[p]}
            if producers <= fired:
                out.append(t)
        return out

    results: set[frozenset[str]] = set()
    visited = 0

    def addable(fired: frozenset[str]) -> bool:
        for t in sorted(net.transitions - fired):
            if any(u in fired for u in conflict_with[t]):
                continue
            producers = {next(iter(net.preset[p])) for p in net.preset[t] if net.preset[p]}
            if producers <= fired:
                return True
        return False

    def search(fired: frozenset[str], banned: frozenset[str]) -> None:
        nonlocal visited
        visited += 1
        if visited > cap:
            raise CapExceededError(f"maximal-configuration search exceeded cap {cap}")
        cands = enabled(fired, banned)
        if not cands:
            if not addable(fired):
                results.add(fired)
            return
        # a transition with no live rival (everyone sharing an input place
        # is banned already) belongs to every maximal configuration that
        # enables it, so include it without branching
        for t in cands:
            if not (conflict_with[t] - banned):
                search(fired | {t}, banned)
                return
        t = cands[0]
        search(fired | {t}, banned)
        search(fired, banned | {t})

    search(frozenset(), frozenset())
    configs = sorted(
        (configuration_of(net, fired) for fired in results),
        key=lambda c: tuple(sorted(c)),
    )
    return tuple(configs)


# ---------------------------------------------------------------------------
# Workflow nets and soundness


@dataclass(frozen=True)
class WorkflowNet:
    """An acyclic net with a unique source place and unique sink place.

    The initial marking is the singleton source.  Every transition must have
    a nonempty preset and postset (a presetless transition breaks 1-safety,
    a postsetless one cannot sit on a source-to-sink path).
    """

    net: Net
    source: str
    sink: str

    @staticmethod
    def from_net(net: Net) -> "WorkflowNet":
        problems: list[str] = []
        cyc = _cycle_node(net)
        if cyc is not None:
            problems.append(f"flow graph has a cycle through {cyc!r}")
        minimal = sorted(p for p in net.places if not net.preset[p])
        maximal = sorted(p for p in net.places if not net.postset[p])
        if len(minimal) != 1:
            problems.append(f"expected a unique minimal place, found {minimal}")
        if len(maximal) != 1:
            problems.append(f"expected a unique maximal place, found {maximal}")
        for t in sorted(net.transitions):
            if not net.preset[t]:
                problems.append(f"transition {t!r} has an empty preset")
            if not net.postset[t]:
                problems.append(f"transition {t!r} has an empty postset")
        if problems:
            raise NetStructureError("not a workflow net: " + "; ".join(problems))
        source, sink = minimal[0], maximal[0]
        if net.initial_marking != frozenset({source}):
            raise NetStructureError(
                f"workflow initial marking must be {{{source!r}}}, got {sorted(net.initial_marking)}"
            )
        return WorkflowNet(net=net, source=source, sink=sink)


@dataclass(frozen=True)
class SoundnessIssue:
    kind: str  # "not_safe" | "cannot_complete" | "improper_completion" | "dead_transition"
    marking: tuple[str, ...] = field(default=())
    transition: str | None = None
    message: str = ""


@dataclass(frozen=True)
class SoundnessVerdict:
    status: str  # "sound" | "unsound" | "undecided"
    issues: tuple[SoundnessIssue, ...]
    markings_explored: int


def is_sound(wf: WorkflowNet, marking_cap: int = 1_000_000) -> SoundnessVerdict:
    """Exhaustive marking-graph soundness check.

    Verifies, over the full reachability graph from the source marking:
    1-safety (no firing doubles a token), option to complete (every
    reachable marking can still mark the sink), proper completion (a marking
    containing the sink is exactly the sink), and absence of dead
    transitions.  Exceeding ``marking_cap`` yields status "undecided".
    """
    net = wf.net
    start = frozenset({wf.source})
    seen: dict[frozenset[str], list[tuple[str, frozenset[str]]]] = {start: []}
    queue = [start]
    fired_somewhere: set[str] = set()
    issues: list[SoundnessIssue] = []

    while queue:
        if len(seen) > marking_cap:
            return SoundnessVerdict(
                status="undecided",
                issues=(
                    SoundnessIssue(
                        kind="cap",
                        message=f"marking exploration exceeded cap {marking_cap}",
                    ),
                ),
                markings_explored=len(seen),
            )
        marking = queue.pop(0)
        succs = seen[marking]
        for t in sorted(net.transitions):
            if not net.preset[t] <= marking:
                continue
            residue = marking - net.preset[t]
            collision = residue & net.postset[t]
            if collision:
                issues.append(
                    SoundnessIssue(
                        kind="not_safe",
                        marking=tuple(sorted(marking)),
                        transition=t,
                        message=f"firing {t!r} at {sorted(marking)} doubles token on {sorted(collision)}",
                    )
                )
                continue
            nxt = residue | net.postset[t]
            fired_somewhere.add(t)
            succs.append((t, nxt))
            if nxt not in seen:
                seen[nxt] = []
                queue.append(nxt)

    if issues:
        # an unsafe net is outside the class this check decides
        return SoundnessVerdict(status="unsound", issues=tuple(issues), markings_explored=len(seen))

    # option to complete: propagate "can reach a sink-marked marking" backwards
    good = {m for m in seen if wf.sink in m}
    changed = True
    while changed:
        changed = False
        for m, succs in seen.items():
            if m not in good and any(nxt in good for _, nxt in succs):
                good.add(m)
                changed = True
    for m in sorted(seen, key=lambda m: tuple(sorted(m))):
        if m not in good:
            issues.append(
                SoundnessIssue(
                    kind="cannot_complete",
                    marking=tuple(sorted(m)),
                    message=f"marking {sorted(m)} cannot reach the sink {wf.sink!r}",
                )
            )

    for m in sorted(seen, key=lambda m: tuple(sorted(m))):
        if wf.sink in m and m != frozenset({wf.sink}):
            issues.append(
                SoundnessIssue(
                    kind="improper_completion",
                    marking=tuple(sorted(m)),
                    message=f"marking {sorted(m)} contains the sink alongside other tokens",
                )
            )

    for t in sorted(net.transitions - fired_somewhere):
        issues.append(
            SoundnessIssue(
                kind="dead_transition",
                transition=t,
                message=f"transition {t!r} is dead (never enabled)",
            )
        )

    status = "sound" if not issues else "unsound"
    return SoundnessVerdict(status=status, issues=tuple(issues), markings_explored=len(seen))
