"""
Spécifications des modules Fire (encodeur) et DFire (décodeur)
"""

from dataclasses import dataclass, asdict
from typing import Dict


@dataclass(frozen=True)
class FireSpec:
    """Fire : squeeze 1x1 puis expansions parallèles 1x1 et 3x3 concaténées"""
    in_c: int
    squeeze_c: int
    expand1_c: int
    expand3_c: int

    @property
    def out_c(self) -> int:
        return self.expand1_c + self.expand3_c

    def count_parameters(self) -> int:
        return ((self.in_c * self.squeeze_c + self.squeeze_c)
                + (self.squeeze_c * self.expand1_c + self.expand1_c)
                + (9 * self.squeeze_c * self.expand3_c + self.expand3_c))

    def describe(self) -> str:
        return f"squeeze {self.squeeze_c}, expand {self.expand1_c}+{self.expand3_c}"

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class DFireSpec:
    """DFire : expansions parallèles 1x1 et 3x3 concaténées, puis squeeze 1x1 de sortie"""
    in_c: int
    expand1_c: int
    expand3_c: int
    squeeze_out_c: int

    @property
    def out_c(self) -> int:
        return self.squeeze_out_c

    def count_parameters(self) -> int:
        return ((self.in_c * self.expand1_c + self.expand1_c)
                + (9 * self.in_c * self.expand3_c + self.expand3_c)
                + ((self.expand1_c + self.expand3_c) * self.squeeze_out_c + self.squeeze_out_c))

    def describe(self) -> str:
        return f"expand {self.expand1_c}+{self.expand3_c}, squeeze {self.squeeze_out_c}"

    def to_dict(self) -> Dict:
        return asdict(self)
