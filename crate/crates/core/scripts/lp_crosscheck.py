#!/usr/bin/env python3
"""Solve CPLEX LP files with HiGHS and print one line per file:

    <path> <status> <objective>

status is "optimal" or "infeasible"; objective is "-" when infeasible.
Exit code 2 when highspy is missing.
"""

import sys

try:
    import highspy
except ImportError:
    sys.stderr.write("highspy is not installed (pip install highspy)\n")
    sys.exit(2)


def solve(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    status = h.readModel(path)
    if status != highspy.HighsStatus.kOk:
        raise RuntimeError(f"cannot read {path}")
    h.run()
    model_status = h.getModelStatus()
    if model_status == highspy.HighsModelStatus.kOptimal:
        return "optimal", h.getInfo().objective_function_value
    if model_status == highspy.HighsModelStatus.kInfeasible:
        return "infeasible", None
    raise RuntimeError(f"{path}: {h.modelStatusToString(model_status)}")


def main(paths):
    for path in paths:
        status, objective = solve(path)
        value = "-" if objective is None else repr(objective)
        print(f"{path} {status} {value}")


if __name__ == "__main__":
    main(sys.argv[1:])
