"""Benchmarking toolkit for synthetic tabular data generation.

Generators (GAN / VAE / independent baseline) trained with correlation- and
mean-aware loss regularizers, evaluated by statistical similarity, TSTR and
augmentation efficacy, and Friedman + Nemenyi significance ranking.
"""

from .tabular import (
    ColumnSpec,
    EncodedMatrix,
    Table,
    TableSchema,
    decode,
    encode,
    infer_schema,
    load_csv,
    split,
)
from .losses import (
    LossConfig,
    composite_generator_loss,
    correlation_loss,
    discriminator_loss,
    generator_adversarial_loss,
    mean_loss,
    vae_composite_loss,
)
from .generators import GanGenerator, IndependentGenerator, VaeGenerator
from .similarity import (
    correlation_diff_score,
    cramers_v_matrix,
    dwp,
    kl_divergence,
    ks_statistic,
    pearson_corr_matrix,
    similarity_suite,
)
from .efficacy import Learner, run_augmentation, run_tstr
from .rankstats import (
    RankMatrix,
    ScoreBlock,
    SignificanceTable,
    classify_pairs,
    friedman_test,
    nemenyi_pairwise,
    normalize_scores,
    rank_rows,
    significance_table,
)
from .runner import BenchConfig, report, run_benchmark

__version__ = "0.1.0"
