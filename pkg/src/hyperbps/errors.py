"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class HyperBPSError(Exception):
    exit_code = 3


class InvalidParameters(HyperBPSError):
    """Mass parameters outside the admissible set, or not generic."""

    exit_code = 2


class NonGeneric(InvalidParameters):
    def __init__(self, report):
        self.report = report
        super().__init__("parameters are not generic: " + "; ".join(report.violated_constraints))


class UsageError(HyperBPSError):
    exit_code = 2


class NumericFailure(HyperBPSError):
    """A quadrature, root finder or ODE integrator did not converge."""

    exit_code = 3


class IllConditioned(NumericFailure):
    pass


class SingularKernel(NumericFailure):
    pass


class VerificationFailure(HyperBPSError):
    exit_code = 1


class IdentificationFailure(VerificationFailure):
    pass
