"""Everything at once: the five-stage pipeline into a results directory.

Equivalent to `vantage run --config demo_discordance.yaml --output-dir
demo_results`. The results.json plus psa_samples.csv pair is the contract
consumed by the browser dashboard in frontend/.
"""

from pathlib import Path

from vantage import load_model_spec, run_analysis_pipeline
from vantage._resources import demo_config_path

out_dir = Path("demo_results")
spec = load_model_spec(demo_config_path())
bundle = run_analysis_pipeline(spec, out_dir)

print(f"wrote {len(list(out_dir.iterdir()))} artifacts to {out_dir}/:")
for path in sorted(out_dir.iterdir()):
    print(f"  {path.name:28s} {path.stat().st_size:10,d} bytes")

decisions = bundle.deterministic["perspectives"]
print(
    "\nhealth system chooses",
    decisions["health_system"]["decision"]["chosen_strategy"],
    "| societal chooses",
    decisions["societal"]["decision"]["chosen_strategy"],
)
print(f"value of perspective: {bundle.voi['deterministic_vop']:,.0f} per person")
