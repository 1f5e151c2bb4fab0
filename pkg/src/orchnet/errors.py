"""Exception types shared across the package."""

from __future__ import annotations


class OrchnetError(Exception):
    """Base class for all errors raised by this package."""


class NetStructureError(OrchnetError):
    """A net (or net-shaped argument) violates a structural precondition."""


class DocumentError(OrchnetError):
    """A document failed schema validation.

    Carries every collected problem, each prefixed with a path into the
    document (for example ``transitions[2].pre[0]``).
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class EvaluationError(OrchnetError):
    """A value, guard, or latency expression could not be evaluated."""


class CapExceededError(OrchnetError):
    """An exhaustive search hit its configured cap before finishing.

    Callers must surface this as an explicit "undecided" outcome, never as a
    silent pass.
    """


class SynthesisError(OrchnetError):
    """Counterexample synthesis could not produce a verified witness pair."""
