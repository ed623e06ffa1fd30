"""Schlesinger transformations of rank-2 Fuchsian systems."""
from .fuchsian import (INF, FuchsianSystem, add_scalar_form, apply_gauge, eigen_data,
                       eigenvalue_condition, evaluate, random_sl2_system, to_finite_chart)
from .io import format_system, load_system, parse_system, save_system
from .modification import (ModificationStep, PairSpec, apply_step, gl2_pair_modify,
                           glueing_matrix, inverse_step, long_shift, pair_modify)
from .monodromy import compare_projective, default_plan, monodromy, product_error
from .weyl import act_on_lambda, act_on_system, coxeter_check, parse_word, word_map

__all__ = [
    "INF", "FuchsianSystem", "add_scalar_form", "apply_gauge", "eigen_data",
    "eigenvalue_condition", "evaluate", "random_sl2_system", "to_finite_chart",
    "format_system", "load_system", "parse_system", "save_system",
    "ModificationStep", "PairSpec", "apply_step", "gl2_pair_modify", "glueing_matrix",
    "inverse_step", "long_shift", "pair_modify",
    "compare_projective", "default_plan", "monodromy", "product_error",
    "act_on_lambda", "act_on_system", "coxeter_check", "parse_word", "word_map",
]
__version__ = "0.1.0"
