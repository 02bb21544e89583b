from .model import (ModelParams, LocalParams, Series, SimOutput, ShiftRecord, simulate_tobit,
                    simulate_linear_ar, simulate_limited_ar, shift_bound)
from .limit_process import (Theta, GridPath, LimitFunctionals, simulate_K, regulate, simulate_Y,
                            limit_functionals, limit_beta_alternative, limit_tstat_draw,
                            limit_tstat_draws)
from .stability import (CompanionPair, JsrCertificate, ExplosionDiagnostics, companion_pair,
                        sufficient_condition, jsr_bounds, explosion_probe)
from .estimation import (Regressors, OlsFit, build_regressors, ols_fit, fwl_check,
                         information_criteria, select_lag)
from .cv_table import CvTable, check_table, read_table, write_table, load_default_table
from .experiments import McConfig, tabulate_null, size_power_experiment, tstat_distribution
from .inference import (TestOptions, TestReport, critical_value_lookup, table_p_value,
                        simulated_p_value, parametric_bootstrap, unit_root_test)
from .exchange_rates import fetch_ecb, chf_eur_floor
from .series_io import read_series_csv, write_series_csv, write_json_report, load_schema
