"""Built-in configuration: device constants and per-experiment settings.

Each section maps keys to their default value; the type of the default is the
type a config file must supply. A ``None`` default means "derive it" and
accepts a number. Units are in the key comments.
"""

DEVICE = {
    "lambda_so_ground": 850.0,  # GHz
    "lambda_so_excited": 3000.0,  # GHz
    "gamma": 35.0,  # MHz
    "p_sat": 4.6,  # nW
    "eta": 80.0,
    "gyro_e": 27.99,  # GHz/T
    "t2_star": 1.3,  # us
    "hyperfine_a": 42.6,  # MHz
    "b_field": 0.2,  # T
    "b_polar": 54.7,  # deg
    "b_azimuth": 0.0,  # deg
}

STRAIN = {
    "a": 0.0,  # GHz
    "b": 0.0,
    "c": 0.0,
    "place_in": "ground",
}

NOISE = {
    "bath": True,
    "bath_tau_c": None,  # ms; None -> calibrated to the Hahn T2
    "bath_shape": "gaussian",  # gaussian | ou
    "quasi_static": 0.0,  # MHz, extra static std
    "leak_power": 0.0,  # nW
    "leak_detuning": 1200.0,  # MHz
    "intrinsic_gamma1": 0.0,  # 1/ms
}

NUCLEAR = {
    "enabled": True,
    "population_plus": 0.5,
}

READOUT = {
    "init_fidelity": 1.0,
    "shot_noise": False,
    "counts": 15000,
}

RUN = {
    "seed": 0,
    "shots": 64,
    "threads": 1,
    "output_dir": ".",
}

LEVELS = {
    "pin_excited_spin": True,
    "c_min": 0.0,  # GHz
    "c_max": 500.0,
    "c_points": 51,
}

CPT = {
    "delta": 0.0,  # MHz
    "power": 10.0,  # nW
    "scan_min": -60.0,  # MHz
    "scan_max": 60.0,
    "scan_points": 601,
    "ground_dephasing": None,  # 1/us; None -> 1/T2*
    "ground_relaxation": None,  # 1/us; None -> noise gamma1
}

ODMR = {
    "delta": 1200.0,
    "power": 50.0,
    "rabi": None,  # MHz
    "duration": None,  # us; None -> pi pulse
    "scan_min": -40.0,
    "scan_max": 40.0,
    "scan_points": 321,
}

RABI = {
    "delta": 1200.0,
    "power": 650.0,
    "rabi": None,
    "two_photon_delta": 0.0,
    "t_max": 2.0,  # us
    "t_points": 81,
}

PHASE_SWEEP = {
    "delta": 1200.0,
    "power": 650.0,
    "rabi": None,
    "phi_points": 41,
}

RAMSEY = {
    "delta": 300.0,
    "power": 58.0,
    "rabi": None,
    "serrodyne_mhz": 5.0,
    "ac_stark_mhz": None,  # None -> computed from the drive
    "tau_max": 3.0,  # us
    "tau_step": 0.025,
    "delta_min": -5.0,  # MHz
    "delta_max": 5.0,
    "delta_step": 1.0,
}

ECHO = {
    "delta": 1200.0,
    "power": 650.0,
    "rabi": None,
    "tau_min": 2.0,  # us
    "tau_max": 60.0,
    "tau_points": 30,
    "phi_points": 13,
}

CPMG = {
    "delta": 1200.0,
    "power": 650.0,
    "rabi": None,
    "tau_min": 10.0,
    "tau_max": 800.0,
    "tau_points": 30,
    "phi_points": 13,
    "bath": False,
    "leak_power": 1.0,
}

T1 = {
    "delay_max": 60.0,  # ms
    "delay_points": 31,
    "leak_power": 1.0,
}

INIT_RATE = {
    "p_min": 0.5,  # nW
    "p_max": 50.0,
    "p_points": 12,
    "t_max": 30.0,  # us
    "t_points": 301,
    "background": 141.0,
}

FIDELITY_MAP = {
    "s_min": 0.1,
    "s_max": 200.0,
    "s_points": 60,
    "delta_min": 100.0,  # MHz
    "delta_max": 5000.0,
    "delta_points": 80,
}

DEFAULTS = {
    "device": DEVICE,
    "strain": STRAIN,
    "noise": NOISE,
    "nuclear": NUCLEAR,
    "readout": READOUT,
    "run": RUN,
    "levels": LEVELS,
    "cpt": CPT,
    "odmr": ODMR,
    "rabi": RABI,
    "phase_sweep": PHASE_SWEEP,
    "ramsey": RAMSEY,
    "echo": ECHO,
    "cpmg": CPMG,
    "t1": T1,
    "init_rate": INIT_RATE,
    "fidelity_map": FIDELITY_MAP,
}

# Sections whose keys may override the noise section for that experiment.
NOISE_OVERRIDES = ("bath", "leak_power")
