"""Values and correlation-set oracles for two-player one-round nonlocal games.

The classical, no-signaling, and unrestricted values of a game, the
doubly-nonnegative (Feige-Lovasz) and first-level moment relaxations of its
quantum value, membership oracles for the corresponding correlation sets,
perfect-strategy feasibility, synchronous-game values, and graph/CSP game
compilers; all conic programs run on the embedded projection solver.
"""

from .conicsolve import (Cone, ConicProgram, DualCertificateDNN, SolveResult,
                         feasibility_distance, solve, verify_certificate)
from .corrsets import (Marginals, MembershipVerdict, classical_membership,
                       corr_membership, cs_witness_check, dnn_to_npa1_witness,
                       is_correlation, is_nosignaling, lift_with_marginals,
                       marginals, npa1_membership)
from .errors import CapExceededError, ParseError, PreconditionError
from .gamecore import (BlockIndex, Game, QuantumStrategy, Scenario, cost_matrix,
                       deterministic_correlation, evaluate_quantum_strategy,
                       j_apply, load_game, save_game, symmetric_cost,
                       win_probability)
from .gamevalues import (ValueChain, ValueReport, dual_value_dnn,
                         perfect_strategy, value_chain, value_classical,
                         value_dnn, value_nosignaling, value_sdp1,
                         value_unrestricted)
from .numkernel import (EigenDecomp, eigh, gram, project_nonneg, project_psd,
                        realify, symmetrize)
from .syncgraph import (CSP, CSPConstraint, Graph, SyncMatrix, chromatic_number,
                        classical_homomorphism, csp_binarize, csp_game,
                        csp_satisfiable, homomorphism_game, independence_number,
                        is_synchronous, load_csp, load_graph,
                        quantum_graph_bounds, quantum_homomorphism_relaxation,
                        sync_matrix, sync_membership, sync_perfect, sync_value)

__version__ = "0.1.0"
