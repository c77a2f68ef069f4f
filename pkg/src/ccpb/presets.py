"""Named experiments: the table runs, the figure parameter sets and the non-neutral demo."""
from __future__ import annotations

from .config import (EtaRule, ExperimentConfig, GammaSpec, GridSpec, SpeciesBlock,
                     SolverSpec)

TABLE1_EPS = [2.0 ** -1, 2.0 ** -3, 2.0 ** -5]
MAIN = SpeciesBlock("main", [[1.0, 1.2]], [[1.0, 0.4], [2.0, 0.4]])
# beta1 = 1 and beta1/beta2 = 1, 1/2, 1/3; alpha1 restores neutrality
TABLE2 = [SpeciesBlock("r1", [[1.0, 3.0]], [[1.0, 1.0], [2.0, 1.0]]),
          SpeciesBlock("r1_2", [[1.0, 5.0]], [[1.0, 1.0], [2.0, 2.0]]),
          SpeciesBlock("r1_3", [[1.0, 7.0]], [[1.0, 1.0], [2.0, 3.0]])]


def _sp(label, anions, cations):
    return SpeciesBlock(label, [[float(z), float(m)] for z, m in anions],
                        [[float(z), float(m)] for z, m in cations])


def _fig3(cations):
    return [_sp(f"a{a}", [(a, 1.2 / a)], cations) for a in (1, 2, 3)]


def _fig4_mixed(cations):
    return [_sp(f"al{a1:g}_{a2:g}", [(1, a1), (2, a2)], cations)
            for a1, a2 in ((0.3, 0.6), (0.5, 0.5), (0.75, 0.375))]


def _sweep(name, species, desc):
    return ExperimentConfig(name=name, command="sweep", species=species, phi_plus=1.0,
                            phi_minus=-1.0, gammas=GammaSpec(), description=desc)


def _build() -> dict[str, ExperimentConfig]:
    p: dict[str, ExperimentConfig] = {}
    for tag, rule in (("I", EtaRule("scaled", coef=0.5, power=2.0)),
                      ("II", EtaRule("scaled", coef=0.5, power=1.0))):
        p[f"fig2-{tag}"] = ExperimentConfig(
            name=f"fig2-{tag}", command="solve", species=[MAIN], models=["ccpb", "pb"],
            eta_rule=rule, eps=list(TABLE1_EPS), grid=GridSpec("uniform", 4096),
            description=f"Table 1 row {tag} / Figure 2: CCPB vs PB, eta = 0.5 eps^{rule.power:g}")
    for tag, rule in (("eta0", EtaRule("zero")),
                      ("eta-eps2", EtaRule("scaled", coef=0.5, power=2.0)),
                      ("eta-eps", EtaRule("scaled", coef=0.5, power=1.0))):
        p[f"table2-{tag}"] = ExperimentConfig(
            name=f"table2-{tag}", command="solve", species=list(TABLE2), eta_rule=rule,
            eps=[2.0 ** -5], grid=GridSpec("uniform", 4096),
            description=f"Table 2 solver rows, {tag}")
    p["table2-limits"] = ExperimentConfig(
        name="table2-limits", command="limits", species=list(TABLE2),
        gammas=GammaSpec(values=[0.0, 0.5]), description="Table 2 limit columns (t, c, c_*)")
    p["fig3-I"] = _sweep("fig3-I", _fig3([(1, 1.199), (2, 0.0005)]),
                         "Figure 3(I): a1 = 1, 2, 3 with (beta1, beta2) = (1.199, 0.0005)")
    p["fig3-II"] = _sweep("fig3-II", _fig3([(1, 0.002), (2, 0.599)]),
                          "Figure 3(II): a1 = 1, 2, 3 with (beta1, beta2) = (0.002, 0.599)")
    p["fig4-1"] = _sweep("fig4-1", [_sp(f"a{a}", [(a, 1.5 / a)], [(1, .25), (2, .25), (3, .25)])
                                    for a in (1, 2, 3, 4)],
                         "Figure 4(1): one anion of valence 1..4, three cations")
    for k, cations in ((2, [(1, 0.75), (2, 0.375)]), (3, [(1, 0.5), (2, 0.5)]),
                       (4, [(1, 0.3), (2, 0.6)])):
        p[f"fig4-{k}"] = _sweep(f"fig4-{k}", _fig4_mixed(cations),
                                f"Figure 4({k}): two anions, cations {cations}")
    fig5 = {"A": ((2, 0.75), [(1, 0.9), (2, 0.12), (3, 0.12)]),
            "B": ((2, 0.75), [(1, 1.23), (2, 0.03), (3, 0.03), (4, 0.03)]),
            "C": ((3, 0.5), [(1, 0.6), (2, 0.1), (3, 0.1), (4, 0.1)]),
            "D": ((3, 0.5), [(1, 0.1), (2, 0.35), (3, 0.1), (4, 0.1)])}
    for tag, (anion, cations) in fig5.items():
        p[f"fig5-{tag}"] = _sweep(f"fig5-{tag}", [_sp(tag, [anion], cations)],
                                  f"Figure 5 case {tag}: non-monotone c(gamma)")
    p["nonneutral"] = ExperimentConfig(
        name="nonneutral", command="nonneutral",
        species=[_sp("a1_b2", [(1, 1.0)], [(1, 2.0)])], phi_plus=0.0, phi_minus=0.0,
        eta_rule=EtaRule("zero"), eps=[2.0 ** -4], kappa=[0.5],
        grid=GridSpec("graded", min_cell_eps2=0.05, growth=1.15, interior_h=2.0 ** -9),
        solver=SolverSpec(), description="Non-electroneutral demo: alpha = 1, beta = 2")
    return p


PRESETS = _build()


def get_preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
