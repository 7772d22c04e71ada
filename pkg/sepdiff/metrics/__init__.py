from .types import TrackScore, RunInfo, RepeatSummary, EvalResult
from .measures import DB_CAP, sdr, sir
from .evaluate import (EVAL_HEADER, score_track, evaluate_estimates, evaluate_model, estimate_path, repeat_count,
                       result_rows, write_eval_csv, report)
from .ablation import AblationGrid, parse_cutoff, completed_cells, run_ablation

__all__ = ['TrackScore', 'RunInfo', 'RepeatSummary', 'EvalResult', 'DB_CAP', 'sdr', 'sir', 'EVAL_HEADER',
           'score_track', 'evaluate_estimates', 'evaluate_model', 'estimate_path', 'repeat_count',
           'result_rows', 'write_eval_csv', 'report', 'AblationGrid', 'parse_cutoff', 'completed_cells',
           'run_ablation']
