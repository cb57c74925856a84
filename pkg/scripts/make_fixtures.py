"""Regenerate the JSON fixtures shipped in src/qdistinguish/fixtures."""

from pathlib import Path

import numpy as np

from qdistinguish import io
from qdistinguish.channels import QuantumChannel, luders_apparatus
from qdistinguish.devices import depolarized_luders, x_dephasing
from qdistinguish.opcore import Observable

OUT = Path(__file__).resolve().parents[1] / "src" / "qdistinguish" / "fixtures"


def main():
    inv = OUT / "invalid"
    inv.mkdir(parents=True, exist_ok=True)
    x2, z2 = Observable.computational(2), Observable.fourier(2)
    x3, z3 = Observable.computational(3), Observable.fourier(3)
    docs = {
        "x_qubit.json": io.observable_to_dict(x2),
        "z_qubit.json": io.observable_to_dict(z2),
        "x_qutrit.json": io.observable_to_dict(x3),
        "z_qutrit.json": io.observable_to_dict(z3),
        "identity_qubit.json": io.channel_to_dict(QuantumChannel.identity(2)),
        "phase_pi2_qubit.json": io.channel_to_dict(QuantumChannel.unitary(np.diag([1, np.exp(0.5j * np.pi)]))),
        "luders_qubit.json": io.apparatus_to_dict(luders_apparatus(x2)),
        "luders_channel_qubit.json": io.channel_to_dict(luders_apparatus(x2).channel),
        "x_dephasing_qubit.json": io.channel_to_dict(x_dephasing(x2, 0.5)),
        "depolarized_luders_qubit.json": io.apparatus_to_dict(depolarized_luders(x2, 0.3)),
        "x_measure_z_guess_qubit.json": io.joint_apparatus_to_dict(
            [[x2.projector(i) / np.sqrt(2)] * 2 for i in range(2)], x2.labels, z2.labels
        ),
    }
    for name, doc in docs.items():
        io.write_json(doc, OUT / name)

    bad_obs = io.observable_to_dict(x2)
    bad_obs["eigenvectors"] = [[[1, 0], [0, 0]], [[0.6, 0], [0.8, 0]]]
    io.write_json(bad_obs, inv / "nonorthonormal_observable.json")

    bad_app = io.apparatus_to_dict(luders_apparatus(x2))
    bad_app["channel"]["kraus"][0] = io.encode_matrix(np.full((4, 2), 0.9))
    io.write_json(bad_app, inv / "non_cptp_apparatus.json")

    io.write_json(io.channel_to_dict(QuantumChannel.identity(3)), inv / "identity_qutrit.json")

    old = io.channel_to_dict(QuantumChannel.identity(2))
    old["schema"] = 0
    io.write_json(old, inv / "wrong_schema_version.json")

    missing = io.channel_to_dict(QuantumChannel.identity(2))
    del missing["kraus"]
    io.write_json(missing, inv / "missing_kraus.json")

    (inv / "not_json.json").write_text("{ this is not json\n")


if __name__ == "__main__":
    main()
