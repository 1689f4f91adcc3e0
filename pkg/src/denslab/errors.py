"""Exception hierarchy shared by all denslab modules.

Every exception carries an ``exit_code`` so the CLI can map failures to
distinct process exit statuses without a lookup table.
"""


class DenslabError(Exception):
    exit_code = 1


class InputError(DenslabError):
    """Malformed input: bad JSON, bad schema, bad term text."""

    exit_code = 3


class TermSyntaxError(InputError):
    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class TermSafetyError(InputError):
    """A term divides by zero or takes sqrt of a negative for some n >= 1."""


class UndefinedNameError(InputError):
    exit_code = 4


class InvariantViolation(DenslabError):
    """A structural invariant failed: a defect in the data or in the library."""

    exit_code = 5


class EvaluationError(InvariantViolation, ArithmeticError):
    """Division by zero, negative sqrt argument or bad factorial argument at a given n."""


class PartitionError(InvariantViolation):
    pass


class GeneratorDefect(InvariantViolation):
    pass


class AxiomViolation(InvariantViolation):
    def __init__(self, message, instance):
        super().__init__(message)
        self.instance = instance


class GoldenMismatch(DenslabError):
    exit_code = 6


class PreconditionError(DenslabError):
    """Refusal: e.g. the sequence has no verified witness, so it is not in Sigma_I."""

    exit_code = 7


class PrecisionError(DenslabError):
    """Enclosures could not be made tight enough; retry with more bits."""

    exit_code = 8

    def __init__(self, message, hint=None):
        if hint is not None:
            message = f"{message} (hint: retry with precision >= {hint})"
        super().__init__(message)
        self.hint = hint
