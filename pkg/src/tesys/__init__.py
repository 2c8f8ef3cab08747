"""TES transition systems: products, compatibility and lazy runtime composition."""
from .compat import check_compatible, shortcut_compatible, verify_relation
from .composability import (EmptyBase, ExplicitPairs, Ruleset, SharedIdentity, SyncKappa,
                            SyncRule, kappa_sync, kappa_sync_shared)
from .errors import (DecompositionLimit, ExplosionLimit, IdentifierOrder, InvalidInit,
                     MissingComponent, ModeMismatch, NonMonotoneTime, RuntimeDeadlock,
                     SpecError, TesError, TimeMismatch)
from .events import EMPTY, Event, Observation, Trace, ev, observable, parse_event, validate_trace
from .product import bounded_lang_equal, product, product_n
from .runtime import enabled_joint_transitions, initial_state, reach, run, runtime_step
from .semantics import (finite_runs, is_deadlock_free, is_prefix_closed_syntactic, live_states,
                        prefix_closure)
from .system import DELAY_INSENSITIVE, TIMED, ExplicitSystem, TesTransitionSystem

__version__ = "0.1.0"
