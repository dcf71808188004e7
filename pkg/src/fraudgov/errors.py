"""Exception hierarchy shared across the engine.

Every error the engine raises deliberately derives from FraudgovError so the
CLI can map failures onto its exit-code contract (usage=1, input validation=2,
computation=3, audit chain=4).
"""

from __future__ import annotations


class FraudgovError(Exception):
    """Base class for all engine errors."""


class InputError(FraudgovError):
    """Invalid user-supplied data or configuration (CLI exit code 2)."""


class ComputationError(FraudgovError):
    """A statistical precondition was violated (CLI exit code 3)."""


# --- statistical kernel ---

class DegenerateLabels(ComputationError):
    """All labels identical; rank statistics over classes are undefined."""


class FeatureMismatch(ComputationError):
    """Two importance vectors do not share the same feature identifiers."""


class ZeroVariance(ComputationError):
    """A rank vector is constant; correlation is undefined."""


class InsufficientGroups(ComputationError):
    """Fewer than two groups supplied to a k-sample test."""


class LengthMismatch(ComputationError):
    """Paired sequences differ in length."""


# --- drift / splits ---

class EmptyInput(ComputationError):
    """An operation requiring samples received none."""


# --- fairness ---

class InsufficientProfiles(ComputationError):
    """Fewer than four proxy profiles; quartile binning impossible."""


class MissingShap(ComputationError):
    """A profiled transaction has no attribution row."""


# --- scoring / monitoring ---

class DuplicateDimension(ComputationError):
    """Two health scores claim the same regulatory dimension."""


class NonMonotoneMonths(InputError):
    """Monitoring history is not a gap-free ascending month sequence."""


class MonthAlreadyRecorded(InputError):
    """A monitoring record for this month already exists in the audit store."""


# --- SAR ---

class UnmappedFeature(InputError):
    """A feature has no category assignment in the configured map."""


# --- economics ---

class ZeroPrecision(ComputationError):
    """Precision of zero makes false-positive derivation undefined."""


# --- ingestion / audit ---

class SchemaMismatch(InputError):
    """A data file header does not match the published schema."""


class ChainBroken(FraudgovError):
    """Audit chain verification failed (CLI exit code 4)."""

    def __init__(self, first_broken: int):
        super().__init__(f"audit chain broken at sequence {first_broken}")
        self.first_broken = first_broken


class LockHeld(InputError):
    """Another writer holds the audit store lock."""


# --- simulator ---

class InfeasibleTarget(InputError):
    """A scenario requests a discrimination target outside (0.5, 1)."""


class ConfigError(InputError):
    """Malformed or unknown configuration keys."""
