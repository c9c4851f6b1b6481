from .category import (
    DEFAULT_BUDGET,
    Counter,
    FinCategory,
    Functor,
    NatTrans,
    arrow_category,
    budget_limit,
    constant_functor,
    discrete,
    empty_category,
    get_budget,
    identity_functor,
    identity_nat,
    inclusion,
    iso_groupoid,
    okey,
    osorted,
    parallel_pair,
    poset_category,
    set_budget,
    terminal,
    to_terminal,
    vertical_compose,
)
from .constructions import (
    coproduct,
    functor_category,
    iso_comma,
    maximal_groupoid,
    present_category,
    product,
    pushout,
    strict_pullback,
)
from .factorize import Square, cat_factorize, find_lift, glued_middle, mapping_path
from .flags import FunctorFlags, functor_flags, is_equivalence, is_full_and_faithful, is_isofibration
from .search import iter_functors, iter_nat_trans
from .validate import category_to_raw, validate_category, validate_functor
