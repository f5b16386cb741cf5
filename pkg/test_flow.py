"""
Test script for rmhd-esdg.
Verifies the core flow: Flux check -> Run -> Convergence study -> Reports.
"""
import os
import tempfile
from dataclasses import replace

from core.config import RunConfig
from core.db import open_session
from core.runner import cmd_convergence, cmd_fluxcheck, cmd_run, report


def test_flow():
    print("--- Starting Test Flow ---")

    # 1. Fresh ledger in a scratch directory
    workdir = tempfile.mkdtemp(prefix="rmhd_flow_")
    db = open_session(f"sqlite:///{os.path.join(workdir, 'ledger.db')}")
    config = RunConfig(problem="alfven1d", nx=10, r=2, t_end=0.1, deterministic=True,
                       out_dir=os.path.join(workdir, "runs"), samples=500)
    print(f"1. Ledger and outputs in {workdir}")

    # 2. Flux properties
    print("2. Checking the two-point fluxes...")
    check = cmd_fluxcheck(config)
    assert check.passed, f"Flux property violations: {check.violations}"
    print(f"   -> {check.samples} pairs, entropy conservation residual "
          f"{check.residuals['entropy_conservation']:.2e}")

    # 3. One run
    print("3. Running the 1D Alfven wave on 10 cells...")
    outcome = cmd_run(db, config)
    assert outcome.run_id is not None, "Run was not recorded"
    assert abs(outcome.field.t - 0.1) < 1e-12
    print(f"   -> Run {outcome.run_id}: {outcome.steps} steps, By l2 error {outcome.errors.l2:.3e}")

    # 4. Convergence
    print("4. Convergence study on 10, 20, 40 cells...")
    study, rows = cmd_convergence(db, replace(config, ladder=(10, 20, 40)))
    for row in rows[1:]:
        assert row.order_l2 > 2.5, f"Order too low at n={row.report.n}: {row.order_l2}"
    print(f"   -> Orders: {[round(r.order_l2, 2) for r in rows[1:]]}")

    # 5. Reports
    print("5. Generating PDF reports...")
    run_pdf = report(db, os.path.join(workdir, "run.pdf"), run_id=outcome.run_id)
    study_pdf = report(db, os.path.join(workdir, "study.pdf"), study_id=study.id)
    assert os.path.getsize(run_pdf) > 0 and os.path.getsize(study_pdf) > 0
    print("   -> Reports written.")

    db.close()
    print("--- Test Flow Completed Successfully ---")


if __name__ == "__main__":
    test_flow()
