"""Double-pushout hypergraph rewriting with interfaces, and confluence
checking for string-diagram rewrite systems (plain, with splitting/merging
structure, and convex)."""

from .hypergraph import (
    Edge,
    GraphWithInterface,
    Homomorphism,
    Hypergraph,
    Signature,
    are_isomorphic,
    coproduct,
    discrete,
    homomorphisms,
    isomorphism,
)
from .category import (
    epi_mono_factorize,
    is_pushout,
    mixed_decomposition_check,
    pullback,
    pushout,
    pushout_complements,
    UnsupportedRuleShape,
)
from .engine import (
    Caps,
    RewriteRule,
    RewriteStep,
    RewritingSystem,
    apply_step,
    enumerate_steps,
    find_join,
    find_matches,
    search_normal_forms,
)
from .terms import (
    Cospan,
    Term,
    interpret,
    parse_term,
    print_term,
    rewire,
    term_type,
    translate_system,
)
from .ma import (
    MaAnalysis,
    analyze_ma,
    boundary_complement,
    convex_step,
    decide_confluence_left_connected,
    enumerate_ma_pre_critical_pairs,
    is_convex_match,
    is_left_connected,
    is_ma_cospan,
    is_ma_rule,
    ma_interface,
)
from .critical import (
    ConfluenceReport,
    PreCriticalPair,
    check_joinable,
    clip_step,
    decide_confluence,
    embed_derivation,
    enumerate_pre_critical_pairs,
    extract_pre_critical_pair,
    is_parallel_pair,
    iter_pre_critical_pairs,
)
from .paths import (
    PathExtension,
    PathRelation,
    build_path_extension,
    decide_local_confluence_convex,
    enumerate_maximal_path_relations,
    is_path_joinable,
    maximal_path_relations,
    path_covers,
    path_relation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
