"""Total-tardiness scheduling for parallel analysis machines with
family-dependent setups, operator availability windows and a limited pool
of columns per family."""

__version__ = "0.1.0"

from .availability import (CapacityProfile, TimeWindowSet,
                           earliest_start_with_setup,
                           earliest_start_without_setup, weekly_windows)
from .annealing import (Encoding, Mechanism, MECHANISMS, Pack, SaParams,
                        SaResult, Structure, decode, encode_schedule,
                        initial_temperature, packs_of, propose_neighbor,
                        run_sa, select_first_item)
from .errors import (CapacityError, IncompleteScheduleError,
                     InstanceFormatError, NoSlotError, SchedulingError)
from .experiments import (AlgorithmSpec, EffectReport, Observation,
                          anova_effects, effect_to_ratio, parse_algorithm,
                          run_experiment)
from .generator import GenConfig, generate_design, generate_instance
from .jsonio import (read_instance, read_schedule, write_instance,
                     write_schedule)
from .list_scheduler import (LtaState, candidate_times, commit_assignment,
                             init_state, run_lta)
from .model import (ColumnType, Instance, Job, Operation, PlacedOperation,
                    Schedule, Violation, job_completion, schedule_metrics,
                    total_tardiness, validate_schedule)
from .rules import (Candidate, MachinePolicy, Rule, RuleParams, atc_priority,
                    atcoee_priority, atcoeef_priority, atcs_priority,
                    select_assignment)
