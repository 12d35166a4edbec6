"""Exception hierarchy.

``DomainError`` subclasses describe invalid input (CLI exit code 1),
``InvariantBreach`` signals an internal inconsistency (exit code 2).
"""


class AffSurfError(Exception):
    code = "AffSurfError"


class DomainError(AffSurfError):
    code = "DomainError"


class InvariantBreach(AffSurfError):
    code = "InvariantBreach"


def _domain(name):
    return type(name, (DomainError,), {"code": name})


DegenerateMap = _domain("DegenerateMap")
OnSlit = _domain("OnSlit")
DegenerateLattice = _domain("DegenerateLattice")
OpenVertexCycle = _domain("OpenVertexCycle")
InvalidSurface = _domain("InvalidSurface")
SlitNotGeodesic = _domain("SlitNotGeodesic")
SlitSelfCrossing = _domain("SlitSelfCrossing")
BadEndpointType = _domain("BadEndpointType")
UnsupportedSlit = _domain("UnsupportedSlit")
StartOutsidePiece = _domain("StartOutsidePiece")
ZeroVelocity = _domain("ZeroVelocity")
LoopNotClosed = _domain("LoopNotClosed")
LoopHitsSingularity = _domain("LoopHitsSingularity")
CuspDetected = _domain("CuspDetected")
NonInvertibleJet = _domain("NonInvertibleJet")
DegenerateLeadingCoefficient = _domain("DegenerateLeadingCoefficient")
OutsidePiece = _domain("OutsidePiece")
SeedOnSingularity = _domain("SeedOnSingularity")
HalfPlaneRegime = _domain("HalfPlaneRegime")
NoBoundedPencil = _domain("NoBoundedPencil")
SpineTraversalCapped = _domain("SpineTraversalCapped")
ExceptionalSkip = _domain("ExceptionalSkip")
Unsupported = _domain("Unsupported")
QuadratureNotConverged = _domain("QuadratureNotConverged")
PoleOfGamma = _domain("PoleOfGamma")
UnrealizableCase = _domain("UnrealizableCase")
FormatError = _domain("FormatError")
UnclassifiedComponent = type("UnclassifiedComponent", (InvariantBreach,), {"code": "UnclassifiedComponent"})
