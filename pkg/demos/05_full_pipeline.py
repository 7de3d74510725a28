"""Running the whole analysis pipeline from the bundled defaults.

Equivalent to ``qlb report --out qlb-out``; the report is a
schema-versioned JSON document carrying full provenance.
"""

import json

from qlb.pipeline import load_config, paper_defaults_path, run_report

config = load_config(paper_defaults_path())
report = run_report(config)

print("stages run:", ", ".join(sorted(report["stages"])))
print("skipped:", [s["stage"] for s in report["skipped"]] or "none")

budget = report["stages"]["budget"]
print("\nbudget fractions (%):")
for channel, v in budget["fractions_pct"].items():
    print(f"  {channel:12s} {v['value']:5.1f} +- {v['sigma']:4.1f}")

tls = report["stages"]["tls_fit"]
print(f"\nTLS fit: Q_TLS0 = {tls['q_tls0']['value']:.3e}"
      f" +- {tls['q_tls0']['sigma']:.1e}")

xps = report["stages"]["xps_fit"]
t = xps["oxide_thickness_nm"]
print(f"oxide thickness: {t['value']:.2f} +- {t['sigma']:.2f} nm")

print("\nprovenance:")
print(json.dumps({k: report["provenance"][k]
                  for k in ("software_version", "config_sha256", "seed")},
                 indent=2))
