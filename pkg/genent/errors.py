class GenentError(Exception):
    pass


class LabelError(GenentError):
    pass


class ArityError(GenentError):
    pass


class ShapeError(GenentError):
    pass


class IntegrityError(GenentError):
    pass


class ValidityError(GenentError):
    pass


class EndpointError(ValidityError):
    pass


class NonMembershipError(GenentError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class DegenerateRowError(GenentError):
    pass


class CascadeFailure(GenentError):
    pass


class NormalFormError(GenentError):
    pass


class DegeneracyError(NormalFormError):
    pass


class DimensionCapError(GenentError):
    def __init__(self, total, cap):
        super().__init__(f"Total dimension {total} exceeds the cap {cap}")
        self.total = total
        self.cap = cap


class ConstructionRefused(GenentError):
    pass
