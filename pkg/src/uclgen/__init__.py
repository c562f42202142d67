"""uclgen: natural-language tasks to validated UCLID5 transition systems.

The pipeline asks an LLM for code in a small Python-shaped modeling
language, parses it error-tolerantly, repairs typing problems by solving
a weighted MAX-SMT problem over type terms, loops hole-filling requests
through the LLM, and compiles the final hole-free program to UCLID5 text
checked by an independent validator.
"""

from .ast_core import ChildProgram
from .frontend import extract_code, parse_tolerant, print_child, prune_to_child
from .pipeline import PipelineOutcome, run_bench, run_pipeline
from .repair import repair_round
from .uclid import compile_program, print_uclid
from .uclid_check import parse_uclid, validate_uclid

__version__ = "0.1.0"

__all__ = [
    "ChildProgram",
    "PipelineOutcome",
    "compile_program",
    "extract_code",
    "parse_tolerant",
    "parse_uclid",
    "print_child",
    "print_uclid",
    "prune_to_child",
    "repair_round",
    "run_bench",
    "run_pipeline",
    "validate_uclid",
    "__version__",
]
