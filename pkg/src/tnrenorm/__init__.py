"""Finite initialization of tensor-network layers with partial norms."""

from .network import (BondConsistencyError, IndexRef, InitParams,
                      OracleTooLargeError, TensorNetworkLayer, build_peps,
                      build_tt, build_ttm, contract_dense, scale_all_nodes)
from .norms import (EnvironmentCache, extend_environment, frobenius_norm_sq,
                    linear_norm, log_norm_reference, method_norm,
                    rescale_cache)
from .protocols import (RenormConfig, RenormReport, ftnr, ltnr, renormalize,
                        replay_trace)
from .tensor import (NormState, NormValue, contract, fill_gaussian,
                     sum_of_entries, sum_of_squares)

__version__ = "0.1.0"
