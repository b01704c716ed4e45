"""Synchronizability analysis for weighted directed oscillator networks.

The package answers three questions about a diffusively coupled network:

* where does its Laplacian spectral gap sit, and is it simple
  (``network``, ``spectra``);
* how does the gap move, to first order, when links are added or
  reweighted (``sensitivity``);
* does the coupled system actually hold or lose synchrony -- via master
  stability curves (``msf``) and direct integration of Hindmarsh-Rose or
  Roessler networks (``simulate``).

The ``syncgap`` console script exposes the same pipeline as four
subcommands with file-based, hash-manifested outputs.
"""

from .errors import (BlockFormError, BranchError, ConvergenceError,
                     DegenerateGapError, DegenerateZeroError, EdgeListError,
                     NoCrossingError, SimulationError, SyncgapError)
from .models import (ModelSpec, coupling_by_name, first_component_coupling,
                     hindmarsh_rose, identity_coupling, jacobian,
                     model_by_name, roessler, vector_field)
from .msf import (LyapunovEstimate, MsfCurve, StabilityReport,
                  critical_coupling, lyapunov_max, stability_check)
from .network import (BlockForm, Decomposition, Laplacian, Network,
                      block_form, decompose, has_rooted_spanning_tree,
                      laplacian, load_network, network_from_edges,
                      network_from_json, network_to_json, read_network)
from .sensitivity import (BlockEigenview, BlockSensitivity, CutsetSensitivity,
                          Perturbation, RankedLink, block_eigenview,
                          classify_links, cutset_sensitivity,
                          edge_perturbation, fd_oracle, feedback_slope,
                          perturbation, sensitivity_block,
                          sensitivity_general)
from .simulate import (Event, Scenario, Trajectory, bundled_scenario,
                       bundled_scenario_names, first_sustained_desync,
                       integrate, read_scenario, scenario_from_json,
                       scenario_to_json, sync_error_series)
from .spectra import (GershgorinReport, PerronCertificate, SpectralGap,
                      eigen_all, gershgorin, perron_certificate,
                      spectral_gap)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "SyncgapError", "EdgeListError", "DegenerateZeroError",
    "DegenerateGapError", "BlockFormError", "BranchError",
    "ConvergenceError", "SimulationError", "NoCrossingError",
    # network
    "Network", "Laplacian", "Decomposition", "BlockForm",
    "load_network", "read_network", "network_from_edges",
    "network_from_json", "network_to_json", "laplacian", "decompose",
    "has_rooted_spanning_tree", "block_form",
    # spectra
    "SpectralGap", "PerronCertificate", "GershgorinReport",
    "eigen_all", "spectral_gap", "perron_certificate", "gershgorin",
    # sensitivity
    "Perturbation", "perturbation", "edge_perturbation",
    "sensitivity_general", "feedback_slope", "BlockEigenview",
    "block_eigenview", "BlockSensitivity", "sensitivity_block",
    "CutsetSensitivity", "cutset_sensitivity", "fd_oracle",
    "RankedLink", "classify_links",
    # models
    "ModelSpec", "hindmarsh_rose", "roessler", "model_by_name",
    "vector_field", "jacobian", "identity_coupling",
    "first_component_coupling", "coupling_by_name",
    # msf
    "LyapunovEstimate", "lyapunov_max", "MsfCurve", "critical_coupling",
    "StabilityReport", "stability_check",
    # simulate
    "Event", "Scenario", "Trajectory", "integrate", "sync_error_series",
    "first_sustained_desync", "scenario_to_json", "scenario_from_json",
    "read_scenario", "bundled_scenario", "bundled_scenario_names",
]
