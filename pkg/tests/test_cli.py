import pytest

from pcamf.cli import main
from pcamf.graphs import Graph


def out_of(capsys, *argv):
    assert main(list(argv)) == 0
    return capsys.readouterr().out


def test_topology(capsys, tmp_path):
    text = out_of(capsys, "topology", "--side", "4")
    g = Graph.from_edgelist(text)
    assert g.n == 16 and set(g.degrees) == {4}
    dest = tmp_path / "sw.txt"
    main(["topology", "--kind", "smallworld", "--n", "30", "--p-wire", "0.2", "--seed", "4",
          "--out", str(dest)])
    assert Graph.load(dest).kind == "smallworld"


def test_topology_needs_size():
    with pytest.raises(SystemExit):
        main(["topology"])


def test_simulate(capsys):
    text = out_of(capsys, "simulate", "--side", "4", "--p", "0.2", "--steps", "10", "--seed", "1")
    lines = text.splitlines()
    assert "t,rho" in lines and len([ln for ln in lines if not ln.startswith("#")]) == 12
    assert text == out_of(capsys, "simulate", "--side", "4", "--p", "0.2", "--steps", "10",
                          "--seed", "1")


def test_simulate_trace(capsys):
    text = out_of(capsys, "simulate", "--side", "4", "--p", "0.5", "--steps", "5", "--trace")
    assert text.splitlines()[0] == "t,rho_sim,rho_mf"


def test_meanfield(capsys):
    text = out_of(capsys, "meanfield", "--map", "grid", "--gamma", "5", "--p", "0.15",
                  "--points", "3")
    assert text.splitlines() == ["rho,mu,sigma2,derivative", "0.0,0.15,0.001275,0.0",
                                 "0.5,0.5000000000000002,0.0025,1.3125", "1.0,0.85,0.001275,0.0"]


def test_meanfield_composite(capsys):
    text = out_of(capsys, "meanfield", "--map", "sw_composite", "--n", "100", "--p-wire", "0.4",
                  "--p", "0.1", "--points", "11")
    assert len(text.splitlines()) == 12 and "np." not in text


def test_bifurcate(capsys, tmp_path):
    fixed = tmp_path / "fp.csv"
    text = out_of(capsys, "bifurcate", "--gamma", "5", "--p-step", "0.1", "--keep", "3",
                  "--transient", "100", "--fixed-out", str(fixed))
    assert text.splitlines()[0] == "p,sample_index,rho"
    assert len(text.splitlines()) == 1 + 5 * 6
    assert fixed.read_text().startswith("p,rho_star,slope,stability")


def test_markov(capsys, tmp_path):
    kernel = tmp_path / "k.csv"
    text = out_of(capsys, "markov", "--n", "16", "--gamma", "4", "--p", "0.35",
                  "--kernel-out", str(kernel))
    assert text.splitlines()[0] == "k,pi" and len(text.splitlines()) == 18
    assert len(kernel.read_text().splitlines()) == 18


def test_sweep_deterministic(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("structures = torus, smallworld\nn = 16\nT = 30\np = 0.2, 0.5\n"
                   "p_w = 0.5\nruns = 3\nseed = 5\n")
    a = out_of(capsys, "sweep", "--config", str(cfg))
    b = out_of(capsys, "sweep", "--config", str(cfg))
    assert a == b and len(a.splitlines()) == 5
    marg = tmp_path / "m.csv"
    c = out_of(capsys, "sweep", "--config", str(cfg), "--runs", "2", "--marginal-out", str(marg))
    assert c != a and marg.read_text().startswith("structure,T,n,p")


def test_sweep_flags_override(capsys):
    text = out_of(capsys, "sweep", "--kind", "torus", "--n", "16", "--steps", "20", "--p", "0.3",
                  "--runs", "2")
    assert len(text.splitlines()) == 2 and text.splitlines()[1].startswith("torus,20,16,-,0.3,")
