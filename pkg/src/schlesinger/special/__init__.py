"""Riemann schemes, hypergeometric and Heun series, and their solution lists."""
from .expressions import (SolutionExpression, check_printed, heun_expressions,
                          heun_local_solutions, kummer_displayed, kummer_solutions,
                          moduli_values)
from .heun import (HeunParams, fit_shifted_operator, heun_coefficients, heun_series,
                   printed_shifted_accessory, verify_heun_relation, verify_heun_second_row)
from .hypergeometric import HypergeomParams, gauss_2f1, verify_gauss_relation
from .schemes import (RiemannScheme, SecondOrderODE, fuchs_excess, heun_ode, heun_scheme,
                      hypergeometric_ode, hypergeometric_scheme, indicial_roots,
                      normalize_scheme, normalize_table, scheme_to_ode3)
