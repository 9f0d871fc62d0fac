"""Simple modules of quantized function algebras of types A, C, D and their Gelfand-Kirillov dimension."""

from .corep import AlgebraSpec, word_action
from .gkdim import gk_report
from .weyl import Family, length, normal_form, word_to_element

__all__ = ["AlgebraSpec", "Family", "gk_report", "length", "normal_form", "word_action", "word_to_element"]
__version__ = "0.1.0"
