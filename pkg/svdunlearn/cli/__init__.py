"""
CLI Commands Module
"""
import typer

from svdunlearn.cli import baseline, cost, evaluate, reproduce, train, unlearn


def register_commands(app: typer.Typer) -> None:
    app.command("train")(train.train)
    app.command("unlearn")(unlearn.unlearn)
    app.command("baseline")(baseline.baseline)
    app.command("eval")(evaluate.evaluate)
    app.command("sweep-alpha")(unlearn.sweep_alpha)
    app.command("sweep-layers")(unlearn.sweep_layers)
    app.command("plot-boundary")(evaluate.plot_boundary)
    app.command("cost")(cost.cost)
    app.command("reproduce-toy")(reproduce.reproduce_toy)
