"""Exception types shared across the package."""


class FollowupsError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FollowupsError):
    """An input file is malformed; the message names the offending line."""


class NotFoundError(FollowupsError):
    """A referenced entity (action, predicate, user) does not exist."""


class ConfigError(FollowupsError):
    """A run configuration is inconsistent or incomplete."""


class ResourceLimitError(FollowupsError):
    """A guarded computation exceeded its configured budget."""
