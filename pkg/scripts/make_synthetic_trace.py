"""Regenerate the bundled synthetic notch trace and its generation parameters."""

import json
from dataclasses import asdict
from pathlib import Path

from cqedkit.resonance import NotchModel, noise_for_snr, resonance_frequencies, synthesize_trace, write_trace

DATA = Path(__file__).resolve().parents[1] / "src" / "cqedkit" / "data"
SEED = 20240501
SNR_DB = 40.0

model = NotchModel.from_internal(f_r=5.9880e9, Q_i=9.2e5, Q_c=1.0e5, phi=0.15, a=0.8, alpha_env=1.1, tau=45e-9)
freqs = resonance_frequencies(model.f_r, model.Q_l, n=2001)
trace = synthesize_trace(model, freqs, noise_for_snr(SNR_DB, model.a), seed=SEED)
write_trace(DATA / "synthetic_trace.csv", trace)
meta = {**asdict(model), "Q_i": model.Q_i, "snr_db": SNR_DB, "seed": SEED, "points": len(freqs)}
(DATA / "synthetic_trace.json").write_text(json.dumps(meta, indent=2) + "\n")
