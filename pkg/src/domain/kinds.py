"""Enumerations shared across data, models and regularizers"""

from enum import Enum

class ModelKind(str, Enum):
    CP = "CP"
    COMPLEX = "ComplEx"
    RESCAL = "RESCAL"

    @property
    def is_diagonal(self) -> bool:
        """Relations act coordinate-wise (CP, ComplEx)"""
        return self is not ModelKind.RESCAL

class RegularizerKind(str, Enum):
    DURA = "DURA"
    BASIC_DURA = "BasicDURA"
    FRO = "FRO"
    N3 = "N3"
    REG_P1 = "RegP1"
    NONE = "None"

class Split(str, Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"
