"""On-disk net documents.

A ``.net`` file is a JSON object describing a carrier net with its timing
and value attributes:

* ``format_version``: currently 1.
* ``kind``: "occurrence" (executed directly) or "workflow" (validated for
  soundness and unfolded before execution).
* ``omega_count``: number of scenario columns; per-scenario tables must
  have exactly this length.
* ``places``: list of ``{"id", "initial_date"?, "initial_value"?}``;
  initial attributes are only legal on minimal places.
* ``transitions``: list of ``{"id", "pre", "post", "latency",
  "latency_class"?, "value_fn"?, "guard"?}``.
* ``grids``: candidate latency values per equality class (dates as
  strings: "inf", integers, decimals, or "p/q").
* ``place_grids``: candidate initial dates per minimal place.
* ``flags.upward_closed``: whether the declared family is closed under
  raising latencies.

Parsing collects every problem (with a JSON path) before failing, so a
bad file is reported in one round.  Serialization is canonical: ids are
sorted, defaults omitted, and the same document always produces the same
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .attributes import (
    ExtendedDate,
    Value,
    atom,
    format_date,
    parse_date,
    value_from_json,
    value_to_json,
)
from .errors import DocumentError, EvaluationError, NetStructureError
from .nets import Net, WorkflowNet, net_from_arcs, require_occurrence_net
from .specs import (
    GuardSpec,
    LatencySpec,
    ValueFnSpec,
    const_latency,
    const_value_fn,
    guard_from_json,
    guard_to_json,
    latency_from_json,
    latency_to_json,
    value_fn_from_json,
    value_fn_to_json,
)
from .timed import OrchNet, PreOrchNet
from .unfolding import CarrierSpecs, UnfoldingResult, induced_preorchnet, unfold

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PlaceDecl:
    id: str
    initial_date: LatencySpec | None = None
    initial_value: Value | None = None


@dataclass(frozen=True)
class TransitionDecl:
    id: str
    pre: tuple[str, ...]
    post: tuple[str, ...]
    latency: LatencySpec
    latency_class: str | None = None
    value_fn: ValueFnSpec | None = None
    guard: GuardSpec | None = None


@dataclass(frozen=True)
class NetDocument:
    kind: str  # "occurrence" | "workflow"
    omega_count: int
    places: tuple[PlaceDecl, ...]
    transitions: tuple[TransitionDecl, ...]
    class_grids: dict[str, tuple[ExtendedDate, ...]] = field(default_factory=dict)
    place_grids: dict[str, tuple[ExtendedDate, ...]] = field(default_factory=dict)
    upward_closed: bool = False

    def effective_class(self, t: TransitionDecl) -> str:
        return t.latency_class if t.latency_class is not None else t.id


# ---------------------------------------------------------------------------
# Parsing


def document_from_json(obj: object) -> NetDocument:
    problems: list[str] = []
    if not isinstance(obj, dict):
        raise DocumentError(["document must be a JSON object"])

    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        problems.append(f"format_version: expected {FORMAT_VERSION}, got {version!r}")

    kind = obj.get("kind")
    if kind not in ("occurrence", "workflow"):
        problems.append(f"kind: expected 'occurrence' or 'workflow', got {kind!r}")
        kind = "occurrence"

    omega_count = obj.get("omega_count", 1)
    if not isinstance(omega_count, int) or omega_count < 1:
        problems.append(f"omega_count: expected a positive integer, got {omega_count!r}")
        omega_count = 1

    known = {
        "format_version", "kind", "omega_count", "places", "transitions",
        "grids", "place_grids", "flags",
    }
    for key in sorted(set(obj) - known):
        problems.append(f"unknown top-level key {key!r}")

    places = _parse_places(obj.get("places"), omega_count, problems)
    transitions = _parse_transitions(obj.get("transitions"), omega_count, problems)
    class_grids = _parse_grid(obj.get("grids", {}), "grids", problems)
    place_grids = _parse_grid(obj.get("place_grids", {}), "place_grids", problems)

    flags = obj.get("flags", {})
    upward_closed = False
    if not isinstance(flags, dict):
        problems.append("flags: expected an object")
    else:
        upward_closed = flags.get("upward_closed", False)
        if not isinstance(upward_closed, bool):
            problems.append("flags.upward_closed: expected a boolean")
            upward_closed = False
        for key in sorted(set(flags) - {"upward_closed"}):
            problems.append(f"flags: unknown key {key!r}")

    doc = NetDocument(
        kind=kind,
        omega_count=omega_count,
        places=places,
        transitions=transitions,
        class_grids=class_grids,
        place_grids=place_grids,
        upward_closed=upward_closed,
    )
    problems.extend(_cross_checks(doc))
    if problems:
        raise DocumentError(problems)
    return doc


def _parse_places(node: object, omega_count: int, problems: list[str]) -> tuple[PlaceDecl, ...]:
    if not isinstance(node, list):
        problems.append("places: expected a list")
        return ()
    out = []
    seen = set()
    for i, raw in enumerate(node):
        path = f"places[{i}]"
        if not isinstance(raw, dict):
            problems.append(f"{path}: expected an object")
            continue
        pid = raw.get("id")
        if not isinstance(pid, str) or not pid:
            problems.append(f"{path}.id: expected a non-empty string")
            continue
        if pid in seen:
            problems.append(f"{path}.id: duplicate place {pid!r}")
            continue
        seen.add(pid)
        initial_date = None
        if "initial_date" in raw:
            initial_date = latency_from_json(
                raw["initial_date"], omega_count, f"{path}.initial_date", problems
            )
        initial_value = None
        if "initial_value" in raw:
            initial_value = value_from_json(
                raw["initial_value"], f"{path}.initial_value", problems
            )
        for key in sorted(set(raw) - {"id", "initial_date", "initial_value"}):
            problems.append(f"{path}: unknown key {key!r}")
        out.append(PlaceDecl(id=pid, initial_date=initial_date, initial_value=initial_value))
    return tuple(out)


def _parse_transitions(
    node: object, omega_count: int, problems: list[str]
) -> tuple[TransitionDecl, ...]:
    if not isinstance(node, list):
        problems.append("transitions: expected a list")
        return ()
    out = []
    seen = set()
    for i, raw in enumerate(node):
        path = f"transitions[{i}]"
        if not isinstance(raw, dict):
            problems.append(f"{path}: expected an object")
            continue
        tid = raw.get("id")
        if not isinstance(tid, str) or not tid:
            problems.append(f"{path}.id: expected a non-empty string")
            continue
        if tid in seen:
            problems.append(f"{path}.id: duplicate transition {tid!r}")
            continue
        seen.add(tid)

        arcs = {}
        for side in ("pre", "post"):
            raw_side = raw.get(side)
            if not isinstance(raw_side, list) or not all(isinstance(p, str) for p in raw_side):
                problems.append(f"{path}.{side}: expected a list of place ids")
                arcs[side] = ()
                continue
            if len(set(raw_side)) != len(raw_side):
                problems.append(f"{path}.{side}: duplicate place ids")
            arcs[side] = tuple(sorted(set(raw_side)))

        if "latency" not in raw:
            problems.append(f"{path}.latency: required")
            latency = const_latency(0)
        else:
            latency = latency_from_json(raw["latency"], omega_count, f"{path}.latency", problems)
            if latency is None:
                latency = const_latency(0)

        latency_class = raw.get("latency_class")
        if latency_class is not None and not isinstance(latency_class, str):
            problems.append(f"{path}.latency_class: expected a string")
            latency_class = None

        value_fn = None
        if "value_fn" in raw:
            value_fn = value_fn_from_json(
                raw["value_fn"], omega_count, f"{path}.value_fn", problems
            )
            if value_fn is not None:
                _check_selects(value_fn, len(arcs["pre"]), f"{path}.value_fn", problems)

        guard = None
        if "guard" in raw:
            guard = guard_from_json(raw["guard"], f"{path}.guard", problems)
            if guard is not None:
                for side, operand in (("left", guard.left), ("right", guard.right)):
                    if operand.kind == "select" and operand.index >= len(arcs["pre"]):
                        problems.append(
                            f"{path}.guard.{side}: select {operand.index} out of range "
                            f"for {len(arcs['pre'])} inputs"
                        )

        for key in sorted(
            set(raw) - {"id", "pre", "post", "latency", "latency_class", "value_fn", "guard"}
        ):
            problems.append(f"{path}: unknown key {key!r}")
        out.append(
            TransitionDecl(
                id=tid,
                pre=arcs["pre"],
                post=arcs["post"],
                latency=latency,
                latency_class=latency_class,
                value_fn=value_fn,
                guard=guard,
            )
        )
    return tuple(out)


def _check_selects(spec: ValueFnSpec, arity: int, path: str, problems: list[str]) -> None:
    if spec.kind == "select" and spec.index >= arity:
        problems.append(f"{path}: select {spec.index} out of range for {arity} inputs")


def _parse_grid(node: object, path: str, problems: list[str]) -> dict[str, tuple[ExtendedDate, ...]]:
    if not isinstance(node, dict):
        problems.append(f"{path}: expected an object")
        return {}
    out = {}
    for key in sorted(node):
        raw_values = node[key]
        if not isinstance(raw_values, list) or not raw_values:
            problems.append(f"{path}.{key}: expected a non-empty list of dates")
            continue
        values = []
        ok = True
        for j, raw in enumerate(raw_values):
            if not isinstance(raw, str):
                problems.append(f"{path}.{key}[{j}]: dates are decimal strings (or 'inf')")
                ok = False
                continue
            try:
                values.append(parse_date(raw))
            except EvaluationError as exc:
                problems.append(f"{path}.{key}[{j}]: {exc}")
                ok = False
        if ok:
            if len(set(values)) != len(values):
                problems.append(f"{path}.{key}: duplicate grid values")
            out[key] = tuple(values)
    return out


def _cross_checks(doc: NetDocument) -> list[str]:
    problems = []
    place_ids = {p.id for p in doc.places}
    transition_ids = {t.id for t in doc.transitions}
    if overlap := sorted(place_ids & transition_ids):
        problems.append(f"ids used for both places and transitions: {overlap}")
    for t in doc.transitions:
        for side in ("pre", "post"):
            for p in getattr(t, side):
                if p not in place_ids:
                    problems.append(f"transition {t.id!r}: {side} references unknown place {p!r}")

    # one declared latency spec per equality class
    class_specs: dict[str, tuple[str, LatencySpec]] = {}
    for t in doc.transitions:
        cls = doc.effective_class(t)
        if cls in class_specs:
            owner, spec = class_specs[cls]
            if spec != t.latency:
                problems.append(
                    f"class {cls!r}: transitions {owner!r} and {t.id!r} declare different latencies"
                )
        else:
            class_specs[cls] = (t.id, t.latency)
    for cls in sorted(doc.class_grids):
        if cls not in class_specs:
            problems.append(f"grids.{cls}: no transition has this latency class")
    for p in sorted(doc.place_grids):
        if p not in place_ids:
            problems.append(f"place_grids.{p}: unknown place")
    return problems


def loads(text: str) -> NetDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError([f"invalid JSON: {exc}"]) from exc
    return document_from_json(obj)


def load(path: str) -> NetDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError([f"cannot read {path}: {exc}"]) from exc
    return loads(text)


# ---------------------------------------------------------------------------
# Serialization


def document_to_json(doc: NetDocument) -> dict:
    places = []
    for p in sorted(doc.places, key=lambda p: p.id):
        entry: dict[str, object] = {"id": p.id}
        if p.initial_date is not None:
            entry["initial_date"] = latency_to_json(p.initial_date)
        if p.initial_value is not None:
            entry["initial_value"] = value_to_json(p.initial_value)
        places.append(entry)
    transitions = []
    for t in sorted(doc.transitions, key=lambda t: t.id):
        entry = {
            "id": t.id,
            "pre": list(t.pre),
            "post": list(t.post),
            "latency": latency_to_json(t.latency),
        }
        if t.latency_class is not None:
            entry["latency_class"] = t.latency_class
        if t.value_fn is not None:
            entry["value_fn"] = value_fn_to_json(t.value_fn)
        if t.guard is not None:
            entry["guard"] = guard_to_json(t.guard)
        transitions.append(entry)
    return {
        "format_version": FORMAT_VERSION,
        "kind": doc.kind,
        "omega_count": doc.omega_count,
        "places": places,
        "transitions": transitions,
        "grids": {cls: [format_date(v) for v in vs] for cls, vs in sorted(doc.class_grids.items())},
        "place_grids": {
            p: [format_date(v) for v in vs] for p, vs in sorted(doc.place_grids.items())
        },
        "flags": {"upward_closed": doc.upward_closed},
    }


def dumps(doc: NetDocument) -> str:
    return json.dumps(document_to_json(doc), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Building runnable nets


@dataclass(frozen=True)
class BuiltDocument:
    document: NetDocument
    carrier: Net | WorkflowNet
    specs: CarrierSpecs
    pre: PreOrchNet
    unfolding: UnfoldingResult | None  # None when the carrier runs directly

    @property
    def carrier_net(self) -> Net:
        c = self.carrier
        return c.net if isinstance(c, WorkflowNet) else c


def build_carrier(doc: NetDocument) -> Net | WorkflowNet:
    try:
        net = net_from_arcs(
            {t.id: (set(t.pre), set(t.post)) for t in doc.transitions},
            places={p.id for p in doc.places},
        )
        if doc.kind == "workflow":
            return WorkflowNet.from_net(net)
        require_occurrence_net(net)
        return net
    except NetStructureError as exc:
        raise DocumentError([f"net: {exc}"]) from exc


def carrier_specs(doc: NetDocument, carrier: Net | WorkflowNet) -> CarrierSpecs:
    net = carrier.net if isinstance(carrier, WorkflowNet) else carrier
    problems = []
    minimal = net.minimal_places
    latency = {}
    value_fn = {}
    guard = {}
    latency_class = {}
    for t in doc.transitions:
        latency[t.id] = t.latency
        value_fn[t.id] = t.value_fn if t.value_fn is not None else const_value_fn(atom(t.id))
        if t.guard is not None:
            guard[t.id] = t.guard
        if t.latency_class is not None:
            latency_class[t.id] = t.latency_class
    initial_date = {}
    for p in doc.places:
        if p.initial_date is not None and p.id not in minimal:
            problems.append(f"place {p.id!r}: initial_date on a non-minimal place")
        if p.initial_value is not None and p.id not in minimal:
            problems.append(f"place {p.id!r}: initial_value on a non-minimal place")
    for p in sorted(doc.place_grids):
        if p not in minimal:
            problems.append(f"place_grids.{p}: not a minimal place")
    if problems:
        raise DocumentError(problems)
    for p in doc.places:
        if p.id in minimal:
            initial_date[p.id] = p.initial_date if p.initial_date is not None else const_latency(0)
    return CarrierSpecs(
        latency=latency,
        value_fn=value_fn,
        initial_date=initial_date,
        guard=guard,
        latency_class=latency_class,
        class_grid=dict(doc.class_grids),
        place_grid=dict(doc.place_grids),
        omega_count=doc.omega_count,
        upward_closed=doc.upward_closed,
    )


def build(doc: NetDocument) -> BuiltDocument:
    """Validate and assemble everything needed to analyze a document."""
    carrier = build_carrier(doc)
    specs = carrier_specs(doc, carrier)
    net = carrier.net if isinstance(carrier, WorkflowNet) else carrier
    if doc.kind == "workflow":
        try:
            result = unfold(carrier)
        except NetStructureError as exc:
            raise DocumentError([f"workflow: {exc}"]) from exc
        pre = induced_preorchnet(result, net, specs)
        return BuiltDocument(document=doc, carrier=carrier, specs=specs, pre=pre, unfolding=result)

    classes: dict[str, set[str]] = {}
    class_spec: dict[str, LatencySpec] = {}
    for t in doc.transitions:
        cls = doc.effective_class(t)
        classes.setdefault(cls, set()).add(t.id)
        class_spec[cls] = t.latency
    initial_value = {
        p.id: p.initial_value for p in doc.places if p.initial_value is not None
    }
    pre = PreOrchNet(
        net=net,
        value_fn=dict(specs.value_fn),
        classes={cls: frozenset(ts) for cls, ts in classes.items()},
        class_spec=class_spec,
        class_grid=dict(doc.class_grids),
        initial_date=dict(specs.initial_date),
        place_grid=dict(doc.place_grids),
        omega_count=doc.omega_count,
        guard=dict(specs.guard),
        initial_value=initial_value,
        upward_closed=doc.upward_closed,
    )
    return BuiltDocument(document=doc, carrier=carrier, specs=specs, pre=pre, unfolding=None)


def document_from_orchnet(orch: OrchNet, kind: str = "occurrence") -> NetDocument:
    """A replayable document for a concrete member (witness serialization).

    Grids are dropped: the document pins exactly one member.
    """
    net = orch.net
    places = []
    for p in sorted(net.places):
        initial_date = orch.initial_date.get(p) if p in net.minimal_places else None
        initial_value = None
        if p in net.minimal_places:
            declared = orch.initial_value.get(p)
            if declared is not None and declared != atom(p):
                initial_value = declared
        places.append(PlaceDecl(id=p, initial_date=initial_date, initial_value=initial_value))
    transitions = []
    for t in sorted(net.transitions):
        vf = orch.value_fn[t]
        if vf == const_value_fn(atom(t)):
            vf = None
        transitions.append(
            TransitionDecl(
                id=t,
                pre=tuple(sorted(net.preset[t])),
                post=tuple(sorted(net.postset[t])),
                latency=orch.latency[t],
                value_fn=vf,
                guard=orch.guard.get(t),
            )
        )
    return NetDocument(
        kind=kind,
        omega_count=orch.omega_count,
        places=tuple(places),
        transitions=tuple(transitions),
    )


# ---------------------------------------------------------------------------
# Bundled example nets


def corpus_names() -> tuple[str, ...]:
    root = resources.files("orchnet").joinpath("corpus")
    return tuple(sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".net")))


def corpus_text(name: str) -> str:
    root = resources.files("orchnet").joinpath("corpus")
    entry = root.joinpath(f"{name}.net")
    if not entry.is_file():
        raise DocumentError([f"unknown corpus net {name!r}; available: {list(corpus_names())}"])
    return entry.read_text(encoding="utf-8")


def load_corpus(name: str) -> NetDocument:
    return loads(corpus_text(name))
