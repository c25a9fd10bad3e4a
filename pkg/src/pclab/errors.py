"""Exception hierarchy shared by every pclab module."""


class PclabError(Exception):
    """Base class for all pclab errors."""


class InputError(PclabError, ValueError):
    """Malformed arguments: shape mismatch, bad index, unknown tag."""


class DegenerateInputError(PclabError, ValueError):
    """A quantity that must be nonzero (a norm, a denominator) vanished."""


class PreconditionError(PclabError):
    """A hypothesis of a claim is violated by the supplied data.

    ``inequality`` names the violated condition so that reports can tell
    "hypothesis fails" apart from "claim fails".
    """

    def __init__(self, message, inequality=None):
        super().__init__(message)
        self.inequality = inequality or message


class FeasibilityError(PreconditionError):
    """No admissible weight/supersolution pair exists for a v-sequence step."""


class DivergenceError(PclabError):
    """A time integrator blew up."""


class ConfigError(PclabError):
    """Configuration file could not be parsed or validated.

    ``problems`` lists every violated constraint, not only the first.
    """

    def __init__(self, problems, exit_code=3):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        self.exit_code = exit_code
        super().__init__("; ".join(self.problems))
