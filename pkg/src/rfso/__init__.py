"""Outage, BER and capacity of a mixed RF/FSO amplify-and-forward link with
partial relay selection, amplifier nonlinearity and receiver IQ imbalance."""

from .analytic import (BPSK, MetricResult, ModulationSpec, avg_ber, capacity_approx,
                       capacity_ceiling, capacity_upper_bound, diversity_gain,
                       ergodic_capacity, j_expectation, outage_probability)
from .fading import OpticalConfig, PrsConfig, rytov_to_alphabeta
from .impairments import HpaKind, HpaModel, IqImbalance, bussgang_coeffs, iq_coeffs
from .sndr import LinkConfig, e2e_sndr, sndr_ceiling

__version__ = "0.1.0"
