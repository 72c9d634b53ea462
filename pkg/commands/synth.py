import click

from dependencies import EXISTING_FILE
from services.scenario_generator import ScenarioGenerator


@click.command("synth")
@click.option("--scenario", "scenario_file", type=EXISTING_FILE, required=True, help="Scenario (JSON)")
@click.option("--seed", type=int, help="Override the scenario seed")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True, help="Output directory")
def synth(scenario_file, seed, out_dir):
    """Generate a synthetic scenario and its ground truth"""
    scenario = ScenarioGenerator.load_scenario(scenario_file)
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    ScenarioGenerator.generate(scenario, out_dir)
