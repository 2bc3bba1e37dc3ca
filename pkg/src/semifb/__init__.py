"""Forward-backward and Viterbi as sparse matrix operations over semirings."""

from ._kernels import set_threads
from .errors import (
    DimensionMismatchError,
    EmptyLatticeError,
    GraphFormatError,
    InfeasibleGraphError,
    InvalidWeightError,
    ZeroDivisionInSemiring,
)
from .fsm import (
    BatchGraph,
    WeightedGraph,
    add_phony_final,
    compose_batch,
    load_graph,
    random_graph,
    replicate,
    save_graph,
)
from .inference import (
    FBResult,
    LikelihoodTensor,
    PosteriorMatrix,
    ViterbiPath,
    backward,
    forward,
    forward_backward,
    forward_backward_batch,
    log_marginal,
    posteriors,
    viterbi,
)
from .lfmmi import LossResult, lfmmi, lfmmi_batch
from .oracle import brute_force
from .semiring import LOG, PROB, TROPICAL, LogWeight, ProbWeight, TropicalWeight
from .sparse import SparseMatrix, SparseVector, block_diagonal, hadamard, vstack

__version__ = "0.1.0"
