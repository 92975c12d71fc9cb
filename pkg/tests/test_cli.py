import subprocess
import sys

import pytest

from qspeed import cli
from qspeed.experiment import CSV_HEADER, read_csv


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_defaults(capsys):
    code, out, _ = run(capsys, "bound")
    assert code == 0
    assert "qubit CZ T_min: 46.2963 ns" in out
    assert "pi/(2||H_I||): 30.8642 ns" in out
    assert "ratio bound / T_min: 0.666667" in out
    assert "witness |<psi|U|psi>|" in out


def test_bound_qubit_and_scaled_coupling(capsys):
    _, out, _ = run(capsys, "bound", "--d-site", "2")
    assert "ratio bound / T_min: 2.000000" in out
    _, out, _ = run(capsys, "bound", "--g-mhz", "5.4")
    assert "qubit CZ T_min: 23.1481 ns" in out and "15.4321 ns" in out


def test_witness(capsys):
    code, out, _ = run(capsys, "witness", "--d-site", "3")
    assert code == 0
    value = float(out.splitlines()[0].split("=")[1])
    assert value <= 1e-8
    code, out, _ = run(capsys, "witness", "--gate", "I")
    assert "no orthogonal-transfer" in out


def test_sweep_and_plot(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    code, out, _ = run(
        capsys, "sweep", "--d-site", "2", "--grid", "0,1.5", "--seeds", "1", "--iterations", "50",
        "--segments", "10", "-o", str(csv), "--threshold", "0.5", "--threshold", "2",
    )
    assert code == 0
    assert "threshold F>=0.5: T/Tmin = 1.5000" in out
    assert "threshold F>=2.0: never crossed" in out
    assert csv.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert len(read_csv(csv)) == 2
    code, out, _ = run(capsys, "plot", str(csv))
    assert code == 0 and (tmp_path / "s.svg").exists()


def test_config_file_with_override(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[device]\nd_site = 3\n[sweep]\ngrid = 0.0\n[optimizer]\nseeds = 1\n")
    csv = tmp_path / "o.csv"
    code, _, _ = run(capsys, "sweep", "--config", str(ini), "--d-site", "2", "-o", str(csv), "-q")
    assert code == 0
    (r,) = read_csv(csv)
    assert r.best_fidelity == pytest.approx(0.4)  # d_site = 2 from the flag


def test_optimize_dumps_pulse(tmp_path, capsys):
    pulse = tmp_path / "pulse.csv"
    code, out, _ = run(
        capsys, "optimize", "--d-site", "2", "--t", "1.5", "--seeds", "1", "--iterations", "20",
        "--segments", "8", "--pulse", str(pulse),
    )
    assert code == 0 and "F=" in out
    lines = pulse.read_text().splitlines()
    assert lines[0].startswith("segment,t_start,t_end,omega_q1_x0") and len(lines) == 9
    code, _, _ = run(
        capsys, "optimize", "--t", "1.0", "--optimizer", "grape", "--ort", "--seeds", "1",
        "--iterations", "2", "--grape-steps", "10", "--pulse", str(pulse),
    )
    assert code == 0
    assert pulse.read_text().splitlines()[0] == "segment,t_start,t_end,omega_q1,omega_q2"


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "sweep", "--grid", "1,0.5")[0] == cli.EXIT_CONFIG
    assert run(capsys, "bound", "--d-site", "7")[0] == cli.EXIT_CONFIG
    assert run(capsys, "sweep", "--ort", "--grid", "0")[0] == cli.EXIT_CONFIG
    assert run(capsys, "plot", str(tmp_path / "missing.csv"))[0] == cli.EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "sweep", "--d-site", "2", "--grid", "0", "-o", str(blocker / "x.csv"))
    assert code == cli.EXIT_IO and "I/O error" in err
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2


def test_full_scale_budget():
    args = cli.build_parser().parse_args(["sweep", "--full-scale"])
    cfg = cli.build_sweep_config(args)
    assert (cfg.opt.seeds, cfg.opt.iterations) == (50, 5000)
    args = cli.build_parser().parse_args(["sweep", "--full-scale", "--optimizer", "grape"])
    cfg = cli.build_sweep_config(args)
    assert (cfg.opt.seeds, cfg.opt.iterations, cfg.opt.grape_steps) == (10, 10_000, 10_000)
    cfg = cli.build_sweep_config(cli.build_parser().parse_args(["sweep"]))
    assert (cfg.opt.seeds, cfg.opt.iterations) == (10, 2000)
    assert cli.build_sweep_config(cli.build_parser().parse_args(["sweep", "--fine"])).grid[-1] == 1.2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qspeed", "bound", "--d-site", "4"], capture_output=True, text=True)
    assert out.returncode == 0 and "CZ4" in out.stdout
