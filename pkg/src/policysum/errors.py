"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/argument problems exit 2,
data problems exit 3, network problems exit 4.
"""


class PolicySumError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(PolicySumError, ValueError):
    """A caller supplied an out-of-contract argument."""


class ConfigError(PolicySumError):
    """Mismatched configuration, e.g. a store opened under the wrong provider."""


class DataError(PolicySumError):
    """Base class for problems with input documents or artifacts."""


class IntegrityError(DataError):
    """A bundled or persisted artifact failed its checksum."""


class FetchPolicyError(DataError):
    """A source was rejected by the active fetch policy."""


class EmptyExtractionError(DataError):
    """A document yielded no usable sentences."""


class EmptyDocumentError(DataError):
    """A summarization request was made against an empty document."""


class CentroidMismatchError(DataError):
    """Summarization mode and centroid artifact disagree."""


class NetworkError(PolicySumError):
    """Base class for transport-level failures."""


class TransportError(NetworkError):
    """A retryable transport failure; carries the endpoint that failed."""

    def __init__(self, message: str, endpoint: str):
        super().__init__(message)
        self.endpoint = endpoint


class HttpStatusError(NetworkError):
    """A non-success HTTP status from a remote source."""

    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


class ProtocolError(NetworkError):
    """A remote service answered with a malformed or inconsistent payload."""


class UndefinedScoreError(PolicySumError):
    """A score is undefined for the given input (e.g. one-cluster silhouette)."""


class EmptyClusterError(PolicySumError):
    """A clustering result contains an empty cluster where members are required."""

    def __init__(self, cluster_index: int):
        super().__init__(f"cluster {cluster_index} has no members")
        self.cluster_index = cluster_index
