"""epialign: align social-media activity with reported epidemic case counts."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    CaseSeries,
    FilterConfig,
    FilterStats,
    Tweet,
    derive_new_cases,
    filter_corpus,
    parse_case_csv_jhu_wide,
    parse_case_csv_long,
    parse_tweet_jsonl,
)
from .experiment import (  # noqa: F401
    DateInterval,
    ExperimentConfig,
    ExperimentResult,
    TimeSetting,
    run_experiment,
    split_preset,
)
from .features import (  # noqa: F401
    DayFeatures,
    EmbeddingConfig,
    FeatureConfig,
    KeywordSpec,
    assemble_day_features,
    build_daily_features,
    daily_keyword_counts,
    daily_tweet_frequency,
    mock_embed,
    pool_embeddings,
)
from .kernels import KernelParams, kernel_eval, kernel_matrix  # noqa: F401
from .ranking import rank_average, spearman  # noqa: F401
from .report import emit_report  # noqa: F401
from .store import EmbeddingStore, read_embedding_store, write_embedding_store  # noqa: F401
from .svr import (  # noqa: F401
    Scaler,
    SvrModel,
    SvrParams,
    fit_scaler,
    grid_search,
    load_model,
    save_model,
    svr_fit,
    svr_predict,
)
