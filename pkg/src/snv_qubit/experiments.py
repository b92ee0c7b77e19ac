"""Registry of CLI experiments and their config sections."""

# Each entry: section (config block with the experiment's settings, None if
# it has none), the config sections it reads and a help line.

LEVELS = {
    "name": "levels",
    "section": "levels",
    "sections": ["device", "strain", "levels"],
    "help": "Transition table and branching ratio of the optical lines",
}

CPT = {
    "name": "cpt",
    "section": "cpt",
    "sections": ["device", "noise", "nuclear", "cpt"],
    "help": "Coherent population trapping spectrum (three-level steady state)",
}

ODMR = {
    "name": "odmr",
    "section": "odmr",
    "sections": ["device", "noise", "nuclear", "readout", "run", "odmr"],
    "help": "All-optical spin resonance with the hyperfine doublet",
}

RABI = {
    "name": "rabi",
    "section": "rabi",
    "sections": ["device", "noise", "readout", "run", "rabi"],
    "help": "Raman Rabi oscillation versus pulse length",
}

PHASE_SWEEP = {
    "name": "phase-sweep",
    "section": "phase_sweep",
    "sections": ["device", "noise", "readout", "run", "phase_sweep"],
    "help": "Two pi/2 pulses with a variable relative phase",
}

RAMSEY = {
    "name": "ramsey",
    "section": "ramsey",
    "sections": ["device", "noise", "readout", "run", "ramsey"],
    "help": "Ramsey map over free-precession time and two-photon detuning",
}

ECHO = {
    "name": "echo",
    "section": "echo",
    "sections": ["device", "noise", "readout", "run", "echo"],
    "help": "Hahn echo phase scans and visibility decay",
}

CPMG = {
    "name": "cpmg",
    "section": "cpmg",
    "sections": ["device", "noise", "readout", "run", "cpmg"],
    "help": "CPMG-2 phase scans and visibility decay",
}

T1 = {
    "name": "t1",
    "section": "t1",
    "sections": ["device", "noise", "readout", "run", "t1"],
    "help": "Spin relaxation under laser leakage",
}

INIT_RATE = {
    "name": "init-rate",
    "section": "init_rate",
    "sections": ["device", "readout", "run", "init_rate"],
    "help": "Initialization traces and the saturation fit of their rates",
}

FIDELITY_MAP = {
    "name": "fidelity-map",
    "section": "fidelity_map",
    "sections": ["device", "fidelity_map"],
    "help": "pi/2 gate fidelity over saturation and detuning",
}

FIT = {
    "name": "fit",
    "section": None,
    "sections": ["device", "run"],
    "help": "Fit a library model to a CSV file",
}

ALL_EXPERIMENTS = {
    e["name"]: e
    for e in (LEVELS, CPT, ODMR, RABI, PHASE_SWEEP, RAMSEY, ECHO, CPMG, T1, INIT_RATE, FIDELITY_MAP, FIT)
}
