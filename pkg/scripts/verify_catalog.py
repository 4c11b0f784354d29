import time

import pandas as pd
from tqdm import tqdm

import equiaffine.configs as conf
from equiaffine import catalog
from equiaffine.common import EquiaffineError, setup_logging
from equiaffine.curvature import sample_curve, samples_frame, CurvatureSample
from equiaffine.oracle import cross_validate, summarize

startTime = time.time()

# Set path to save tables
path_save = conf.path_output / "catalog"

# Which scenarios should we run? None runs the whole catalog
scenarios = None
# scenarios = ['paper-ex-ii', 'paper-ex-iii']

oracle = True # cross validate against finite differences?
threads = conf.cli_threads

# For debug
# conf.grid_count = 10


def run(name):
    scenario = catalog.builtin(name)
    order = scenario.options.get('jet_order', conf.jet_order)
    samples = sample_curve(scenario.curve, scenario.metric, scenario.grid, order=order, threads=threads)
    frame = samples_frame(samples, columns=['t', 'x', 'y'] + [f for f in CurvatureSample._fields
                                                                if f not in ('t', 'point', 'ode_residual')])
    frame.to_csv(path_save / f"{name}.csv", index=False, float_format=conf.float_format)

    summary = dict(scenario=name,
                   samples=len(frame),
                   nondegenerate=int((frame['classification'] == 'nondegenerate').sum()),
                   max_relation_residual=frame['relation_residual'].max(),
                   max_ode_residual=frame['ode_residual_norm'].max(),
                   max_formula_residual=frame['formula_residual'].max(),
                   max_identity_residual=frame['identity_residual'].max(),
                   max_frenet_residual=frame['frenet_residual'].max())
    if oracle:
        report = cross_validate(scenario.curve, scenario.metric, scenario.grid, order=order, threads=threads)
        report.to_csv(path_save / f"{name}_oracle.csv", index=False, float_format=conf.float_format)
        s = summarize(report)
        summary.update(oracle_flagged=s.flagged, oracle_max_rel_error=s.max_rel_error)
    return summary


def main():
    setup_logging()
    path_save.mkdir(parents=True, exist_ok=True)

    rows = []
    for name in tqdm(scenarios or catalog.builtin_names()):
        try:
            rows.append(run(name))
        except EquiaffineError as e:
            print(f"Error: {name}: {e}")
            continue

    summary = pd.DataFrame(rows)
    summary.to_csv(path_save / "summary.csv", index=False)
    print(summary.to_string(index=False))
    print('Execution time in seconds: ' + str(time.time() - startTime))


if __name__ == "__main__":
    main()
