"""Core exceptions for the knowledge graph completion engine"""

class ConfigurationError(Exception):
    """Configuration related errors"""
    pass

class UnsupportedCombinationError(ConfigurationError):
    """A model kind and an operation or regularizer that do not go together"""
    pass

class DataError(Exception):
    """Input data related errors"""
    pass

class TripleParseError(DataError):
    """Malformed line in a triple file"""

    def __init__(self, path, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")

class VocabularyError(DataError):
    """Entity or relation name unknown to a frozen vocabulary"""

    def __init__(self, token: str, kind: str = "entity"):
        self.token = token
        self.kind = kind
        super().__init__(f"unseen {kind} '{token}'")

class AugmentationStateError(DataError):
    """Reciprocal augmentation applied to already augmented triples"""
    pass

class ModelFormatError(DataError):
    """Parameter file is corrupt or inconsistent with its header"""
    pass

class NumericError(Exception):
    """Non-finite values during training or scoring"""
    pass

class NonFiniteScoreError(NumericError):
    """Scores of one query row are not finite"""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"non-finite scores for query row {row}")

class ContractError(Exception):
    """Caller violated an operation precondition"""
    pass
