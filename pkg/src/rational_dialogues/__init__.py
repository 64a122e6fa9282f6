"""Bayesian dialogues over finite partition frameworks, with exact arithmetic.

Simulate what two agents announce when they take turns stating their posterior
of an event, and build frameworks that make any finite sequence of announcements
(where certainty is always echoed) come out of such a dialogue.
"""
from .engine import (
    DialogueTrace,
    dialogue_step,
    is_common_knowledge,
    is_expert,
    opinion,
    opinion_function,
    reachable_closure,
    refine_by_announcement,
    run_dialogue,
)
from .matrix_io import (
    builtin_fixtures,
    emit_matrix,
    load_fixture,
    matrix_to_framework,
    parse_dialogue,
    parse_matrix,
)
from .model import (
    Framework,
    FrameworkError,
    Partition,
    drop_null_states,
    join_partitions,
    normalize_measure,
    validate_framework,
)
from .rationalizer import (
    Dialogue,
    check_certainty_acquiescence,
    expand_silence,
    make_didactic_dialogue,
    rationalize,
)

__version__ = "0.1.0"
