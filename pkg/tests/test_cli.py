import numpy as np
import pytest

from aughess.cli import main
from aughess.config import RunConfig
from aughess.errors import ConfigError
from aughess.report import strip_volatile

OPERATOR_CFG = """
[operator]
family = Fk
k = 2
n = 3

[certify]
samples = 300
conditions = F1,F2,F5
seed = 5
"""

PROBLEM_CFG = """
[operator]
family = Fk
k = 2
n = 2

[augmenting]
family = EuclideanYamabe

[domain]
shape = Disk
radius = 1.0

[boundary]
family = Neumann
phi = 1.0

[certify]
seed = 5
boundary_count = 32
z_count = 4
points = 12
"""

SOLVE_CFG = """
[operator]
family = Fk
k = 2
n = 2

[boundary]
phi = -0.5

[solver]
manufactured = yamabe-disk
n_r = 17
n_theta = 32
comparison_offset = 1.0

[certify]
seed = 5
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# ----------------------------------------------------------------------------
# config parsing


def test_unknown_key_is_error():
    with pytest.raises(ConfigError) as ex:
        RunConfig.parse("[operator]\nfamily = Fk\nwhat = 3\n")
    assert "what" in str(ex.value)


def test_unknown_section_is_error():
    with pytest.raises(ConfigError):
        RunConfig.parse("[nonsense]\nx = 1\n")


def test_missing_required_key():
    with pytest.raises(ConfigError) as ex:
        RunConfig.parse("[operator]\nfamily = Fk\n", require=("operator",))
    assert "n" in str(ex.value)


def test_comments_and_types():
    cfg = RunConfig.parse(
        "[operator]\nfamily = Fk  # the k-Hessian\nk = 2\nn = 3\n"
        "[certify]\nband = 0.5, 2.0\nconditions = F1, F2\n")
    assert cfg.get("operator", "k") == 2
    assert cfg.get("certify", "band") == (0.5, 2.0)
    assert cfg.get("certify", "conditions") == ("F1", "F2")
    assert cfg.get("output", "figures") is True     # default filled in


def test_resolved_round_trip_is_byte_identical():
    cfg = RunConfig.parse(OPERATOR_CFG)
    dump = cfg.dump()
    cfg2 = RunConfig.parse(dump)
    assert cfg2.dump() == dump
    assert cfg2.sha256() == cfg.sha256()


def test_build_operator_and_domain():
    cfg = RunConfig.parse(PROBLEM_CFG)
    op = cfg.build_operator()
    assert op.label() == "F_2 (n=2)"
    dom = cfg.build_domain()
    assert dom.radius == 1.0
    g = cfg.build_boundary(dom)
    assert g.family == "Neumann"


def test_bad_value_parse():
    with pytest.raises(ConfigError):
        RunConfig.parse("[operator]\nn = banana\n")


# ----------------------------------------------------------------------------
# commands and exit codes


def test_check_operator_exit_zero(tmp_path):
    cfg = write(tmp_path, "op.cfg", OPERATOR_CFG)
    out = tmp_path / "out"
    assert main(["check-operator", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "report.txt").exists()
    assert (out / "resolved.cfg").exists()
    assert (out / "conditions.png").exists()
    text = (out / "report.txt").read_text()
    assert "condition F1: PASS" in text
    assert "-- csv: conditions --" in text


def test_check_operator_degenerate_f1_fails(tmp_path):
    cfg = write(tmp_path, "mk.cfg", """
[operator]
family = Mk
k = 1
n = 2

[certify]
samples = 200
conditions = F1
seed = 2
eig_box = 0.05,3.0
""")
    out = tmp_path / "out"
    assert main(["check-operator", "--config", cfg, "--out", str(out)]) == 1
    assert "condition F1: FAIL" in (out / "report.txt").read_text()


def test_malformed_config_exit_two(tmp_path):
    cfg = write(tmp_path, "bad.cfg", "[operator]\nfamily = Fk\nbogus = 1\n")
    assert main(["check-operator", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    cfg2 = write(tmp_path, "bad2.cfg", "not an ini file [ at all")
    assert main(["check-operator", "--config", cfg2, "--out", str(tmp_path / "o")]) == 2


def test_missing_file_exit_two(tmp_path):
    assert main(["check-operator", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path / "o")]) == 2


def test_check_problem_yamabe_bundle(tmp_path):
    cfg = write(tmp_path, "prob.cfg", PROBLEM_CFG)
    out = tmp_path / "out"
    assert main(["check-problem", "--config", cfg, "--out", str(out)]) == 0
    text = (out / "report.txt").read_text()
    assert "strict regularity: PASS" in text
    assert "uniform convexity: PASS" in text


def test_check_problem_zero_a_fails_with_reason(tmp_path):
    cfg = write(tmp_path, "prob.cfg",
                PROBLEM_CFG.replace("family = EuclideanYamabe", "family = Zero"))
    out = tmp_path / "out"
    assert main(["check-problem", "--config", cfg, "--out", str(out)]) == 1
    assert "not strictly regular" in (out / "report.txt").read_text()


def test_check_problem_capillarity_theta_zero_fails(tmp_path):
    cfg = write(tmp_path, "prob.cfg", PROBLEM_CFG.replace(
        "family = Neumann\nphi = 1.0",
        "family = Capillarity\nphi = 1.0\ntheta = 0.0"))
    out = tmp_path / "out"
    assert main(["check-problem", "--config", cfg, "--out", str(out)]) == 1
    assert "theta > 0" in (out / "report.txt").read_text()


def test_solve_manufactured(tmp_path):
    cfg = write(tmp_path, "solve.cfg", SOLVE_CFG)
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "fields.csv").exists()
    assert (out / "solution.png").exists()
    assert (out / "convergence.png").exists()
    header = (out / "fields.csv").read_text().splitlines()[0]
    assert header == "x,y,u,|Du|,margin"
    text = (out / "report.txt").read_text()
    assert "converged: True" in text
    assert "comparison bound: PASS" in text
    assert "manufactured reference error" in text


def test_solve_inadmissible_seed_exit_one(tmp_path):
    cfg = write(tmp_path, "solve.cfg", """
[operator]
family = Fk
k = 2
n = 2

[augmenting]
family = EuclideanYamabe

[rhs]
family = Constant
value = 0.3

[domain]
shape = Disk
radius = 1.0

[boundary]
family = Neumann
phi = -0.5

[solver]
n_r = 9
n_theta = 16
seed_eps = -1.0
""")
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 1
    assert "seed error" in (out / "report.txt").read_text()


def test_solve_degenerate_ladder_report(tmp_path):
    cfg = write(tmp_path, "deg.cfg", """
[operator]
family = Mk
k = 1
n = 2

[boundary]
phi = -0.5

[solver]
manufactured = degenerate-min-disk
n_r = 9
n_theta = 16
""")
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    text = (out / "report.txt").read_text()
    assert "-- csv: eps_ladder --" in text
    assert (out / "eps_ladder.png").exists()


def test_hoelder_probe_command(tmp_path):
    cfg = write(tmp_path, "probe.cfg", "[probe]\npoints = 200\n")
    out = tmp_path / "out"
    assert main(["hoelder-probe", "--config", cfg, "--out", str(out)]) == 0
    text = (out / "report.txt").read_text()
    assert "S_k null" in text
    assert (out / "hoelder.png").exists()


def test_reports_deterministic_given_seed(tmp_path):
    cfg = write(tmp_path, "op.cfg", OPERATOR_CFG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["check-operator", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["check-operator", "--config", cfg, "--out", str(out2)]) == 0
    r1 = strip_volatile((out1 / "report.txt").read_text())
    r2 = strip_volatile((out2 / "report.txt").read_text())
    assert r1 == r2


def test_seed_flag_changes_samples_not_verdict(tmp_path):
    cfg = write(tmp_path, "op.cfg", OPERATOR_CFG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["check-operator", "--config", cfg, "--out", str(out1),
                 "--seed", "1"]) == 0
    assert main(["check-operator", "--config", cfg, "--out", str(out2),
                 "--seed", "2"]) == 0
    r1 = strip_volatile((out1 / "report.txt").read_text())
    r2 = strip_volatile((out2 / "report.txt").read_text())
    assert r1 != r2


def test_figures_can_be_disabled(tmp_path):
    cfg = write(tmp_path, "op.cfg", OPERATOR_CFG + "\n[output]\nfigures = false\n")
    out = tmp_path / "out"
    assert main(["check-operator", "--config", cfg, "--out", str(out)]) == 0
    assert not (out / "conditions.png").exists()
