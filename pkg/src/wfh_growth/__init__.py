"""Endogenous-growth model of home-office labor with distracting time.

Closed-form balanced-growth results, the Hamiltonian optimality system, and a
simulator that checks one against the other.
"""
from .bgp import (BgpRates, ValidationReport, bgp_rates, convergence_exponent,
                  corollary1_output_rate, ies_distraction, ies_limit_scan,
                  marginal_utility_elasticity, prop1_identity, utility_closed_form,
                  validate_params)
from .controls import GridSpec, brute_force_controls, solve_controls
from .model import (CapitalState, Controls, Costates, ExtendedState, Params, effort,
                    foc_residuals, hamiltonian, hamiltonian_partials, ode_rhs, production,
                    utility)
from .simulate import (Trajectory, TrajectoryRecord, VerificationReport, bgp_find_l0,
                       bgp_initial_state, discounted_utility, estimate_growth_rates, integrate,
                       verify_bgp)

__version__ = "0.1.0"
