#!/usr/bin/env python3
"""Writes the bundled 34-bus-style example feeder and its resources.

Output is deterministic; rerunning overwrites data/ieee34_style/ with
identical bytes.
"""

import json
import math
import os
import random
import sys

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "ieee34_style")

MV_LG = 24900.0 / math.sqrt(3.0)
LV_4KV_LG = 4160.0 / math.sqrt(3.0)
LV_SERVICE = 120.0
FT_PER_MILE = 5280.0
# Section lengths are the classic ones shortened by this factor, which puts
# the main-line resonance in the 1.5-2 kHz band.
LENGTH_SCALE = 0.25

# Positive-sequence ohms per mile for the two conductor families.
MAIN_Z = (0.65, 0.85, 5.5e-6)
LATERAL_Z = (1.50, 0.95, 4.5e-6)

# (from, to, length ft, main line?)
LINES = [
    ("800", "802", 2580, True),
    ("802", "806", 1730, True),
    ("806", "808", 32230, True),
    ("808", "810", 5804, False),
    ("808", "812", 37500, True),
    ("812", "814", 29730, True),
    ("814", "850", 10, True),
    ("850", "816", 310, True),
    ("816", "818", 1710, False),
    ("818", "820", 48150, False),
    ("820", "822", 13740, False),
    ("816", "824", 10210, True),
    ("824", "826", 3030, False),
    ("824", "828", 840, True),
    ("828", "830", 20440, True),
    ("830", "854", 520, True),
    ("854", "856", 23330, False),
    ("854", "852", 36830, True),
    ("852", "832", 10, True),
    ("832", "858", 4900, True),
    ("858", "864", 1620, False),
    ("858", "834", 5830, True),
    ("834", "842", 280, True),
    ("842", "844", 1350, True),
    ("844", "846", 3640, True),
    ("846", "848", 530, True),
    ("834", "860", 2020, True),
    ("860", "836", 2680, True),
    ("836", "840", 860, True),
    ("836", "862", 280, True),
    ("862", "838", 4860, False),
    ("888", "890", 10560, False),
]

# Per-phase spot loads, kW and kvar.
SPOT_LOADS = {
    "806": (20, 10), "810": (5, 2), "820": (10, 5), "822": (45, 22), "826": (13, 7), "828": (4, 2),
    "830": (15, 7), "856": (2, 1), "858": (8, 4), "864": (1, 1), "834": (30, 15), "842": (3, 1),
    "844": (45, 35), "846": (20, 11), "848": (20, 16), "860": (20, 16), "836": (12, 6), "840": (10, 8),
    "838": (10, 5), "890": (50, 25),
}

# Feeder capacitor banks, kvar per phase at nominal voltage.
FEEDER_CAPS = {"844": 3.0}

# Service transformer feeding the residential point of common coupling.
SERVICE_KVA = 50.0
SERVICE_R = 0.01
SERVICE_X = 0.0204
PCC_CAP_KVAR = 2.6


def mv_bus(b):
    return b not in ("888", "890")


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")


def g(x):
    return "%.9g" % x


def ratio(v_from, v_to):
    # Winding ratio at nominal voltage, from the rounded bus voltages.
    return round(v_from, 3) / round(v_to, 3)


def network():
    buses = [{"id": "sourcebus", "nominal_voltage": round(MV_LG, 3), "is_slack": True}]
    ids = sorted({b for line in LINES for b in line[:2]} | {"800"})
    for b in ids:
        v = MV_LG if mv_bus(b) else LV_4KV_LG
        buses.append({"id": b, "nominal_voltage": round(v, 3)})
    buses.append({"id": "pcc", "nominal_voltage": LV_SERVICE})

    branches = []
    for f, t, ft, main in LINES:
        r, x, b = MAIN_Z if main else LATERAL_Z
        miles = LENGTH_SCALE * ft / FT_PER_MILE
        branches.append({
            "name": "line_%s_%s" % (f, t), "from": f, "to": t,
            "resistance": round(r * miles, 6), "reactance": round(x * miles, 6),
            "shunt_susceptance": round(b * miles, 12),
        })

    transformers = [
        {"name": "substation", "from": "sourcebus", "to": "800", "rated_kva": 833.0,
         "leakage_r": 0.006, "leakage_x": 0.03, "turns_ratio": 1.0},
        {"name": "xf_832_888", "from": "832", "to": "888", "rated_kva": 167.0,
         "leakage_r": 0.0095, "leakage_x": 0.0204, "turns_ratio": ratio(MV_LG, LV_4KV_LG),
         "blocks_triplen": True},
        {"name": "service_pcc", "from": "822", "to": "pcc", "rated_kva": SERVICE_KVA,
         "leakage_r": SERVICE_R, "leakage_x": SERVICE_X, "turns_ratio": ratio(MV_LG, LV_SERVICE),
         "constant_xr": True},
    ]

    caps = []
    for bus, kvar in sorted(FEEDER_CAPS.items()):
        caps.append({"name": "cap_" + bus, "bus": bus,
                     "susceptance": round(kvar * 1e3 / MV_LG ** 2, 12)})
    caps.append({"name": "cap_pcc", "bus": "pcc",
                 "susceptance": round(PCC_CAP_KVAR * 1e3 / LV_SERVICE ** 2, 9)})

    source = {"bus": "sourcebus", "voltage_mag": 1.05, "voltage_angle": 0.0,
              "thevenin_r": 0.4, "thevenin_x": 2.6, "base_frequency_hz": 60.0, "base_mva": 1.0}
    return buses, branches, transformers, caps, source


def linear_loads():
    loads = []
    for bus, (kw, kvar) in sorted(SPOT_LOADS.items()):
        loads.append({"name": "load_" + bus, "bus": bus, "kw": kw, "kvar": kvar,
                      "profile": "residential_linear", "series_parallel_mix": 0.5})
    loads.append({"name": "pcc_linear", "bus": "pcc", "kw": 12.0, "kvar": 3.0,
                  "profile": "residential_linear", "series_parallel_mix": 0.5})
    return loads


def feeder(scenario):
    buses, branches, transformers, caps, source = network()
    loads = linear_loads()
    devices = []
    if scenario in (1, 2):
        loads.append({"name": "pcc_nonlinear", "bus": "pcc", "kw": 20.0, "kvar": 4.0,
                      "profile": "residential_nonlinear", "series_parallel_mix": 0.5,
                      "spectrum": "scenario%d_current" % scenario})
    else:
        devices.append({"type": "pv", "name": "pv_pcc", "bus": "pcc", "s_rating": 10000.0,
                        "power_factor": 1.0, "profile": "pv_output", "spectrum": "pv_voltage",
                        "series_r": 0.02, "series_x": 0.06})
        devices.append({"type": "ev", "name": "ev_pcc", "bus": "pcc", "capacity": 40000.0,
                        "charge_power": 7200.0, "initial_soc": 0.2, "soc_min": 0.1, "soc_max": 1.0,
                        "soc_target": 0.95, "eta_inv": 0.96, "eta_ch": 0.95, "p_idle": 100.0,
                        "availability_profile": "ev_availability", "spectrum": "ev_voltage",
                        "series_r": 0.02, "series_x": 0.06})
    return {"buses": buses, "branches": branches, "transformers": transformers,
            "capacitors": caps, "source": source, "loads": loads, "devices": devices}


SPECTRA = {
    # Residential electronics: dominated by low odd orders.
    "scenario1_current": [(1, 100, 0), (3, 24, -15), (5, 12, 40), (7, 6, -60), (9, 3.5, 20),
                          (11, 2.4, 75), (13, 1.6, -30), (15, 1.0, 50), (17, 0.8, -80), (19, 0.6, 10),
                          (21, 0.45, 60), (23, 0.35, -40), (25, 0.3, 30), (27, 0.25, -20),
                          (29, 0.2, 45), (31, 0.15, 0)],
    # Converter-rich mix with a cluster at 25/27/29.
    "scenario2_current": [(1, 100, 0), (3, 8, -15), (5, 5, 40), (7, 3, -60), (9, 1.5, 20),
                          (11, 1.2, 75), (13, 1.0, -30), (21, 1.5, 10), (23, 3.0, -25),
                          (25, 7.5, 35), (27, 10.0, -10), (29, 7.0, 60), (31, 2.5, -45),
                          (33, 1.0, 15)],
    "pv_voltage": [(1, 100, 0), (5, 0.6, 20), (7, 0.4, -35), (11, 0.25, 60), (13, 0.2, -10),
                   (23, 0.3, 30), (25, 0.35, -15), (27, 0.3, 45)],
    "ev_voltage": [(1, 100, 0), (3, 1.5, 10), (5, 2.0, -20), (7, 1.2, 30), (11, 0.8, -45),
                   (23, 2.0, 15), (25, 3.0, -30), (27, 2.5, 20), (29, 1.5, -5)],
    # Aggregate nonlinear load used by the placement experiment.
    "aggregate_nonlinear": [(1, 100, 0), (3, 20, -15), (5, 14, 40), (7, 9, -60), (9, 5, 20),
                            (11, 6, 75), (13, 5, -30), (15, 2, 50), (17, 3.5, -80), (19, 3, 10),
                            (21, 1.5, 60), (23, 2.5, -40), (25, 2.5, 30), (27, 2, -20),
                            (29, 2, 45), (31, 1.5, 0), (33, 1.0, 25), (35, 1.0, -35)],
}


def daily(minute, peaks, base):
    h = minute / 60.0
    v = base
    for centre, width, height in peaks:
        d = min(abs(h - centre), 24.0 - abs(h - centre))
        v += height * math.exp(-0.5 * (d / width) ** 2)
    return v


def profiles():
    rng = random.Random(34)
    lin, nonlin, pv, ev = [], [], [], []
    for m in range(1440):
        noise = 1.0 + 0.03 * (rng.random() - 0.5)
        lin.append(daily(m, [(7.5, 1.2, 0.25), (19.0, 2.2, 0.55)], 0.4) * noise)
        noise = 1.0 + 0.05 * (rng.random() - 0.5)
        nonlin.append(daily(m, [(8.0, 1.0, 0.3), (20.0, 2.0, 0.6)], 0.35) * noise)
        h = m / 60.0
        sun = math.sin(math.pi * (h - 6.0) / 13.0) if 6.0 <= h <= 19.0 else 0.0
        cloud = 1.0 - 0.15 * rng.random() if sun > 0 else 1.0
        pv.append(max(0.0, min(1.0, 0.95 * sun * cloud)))
        ev.append(1.0 if m >= 900 else 0.0)
    return {"residential_linear": lin, "residential_nonlinear": nonlin,
            "pv_output": pv, "ev_availability": ev}


def waveform(spec, amplitude, fs, cycles, f0=60.0):
    n = int(round(fs / f0)) * cycles
    rows = []
    for i in range(n):
        t = i / fs
        v = 0.0
        for order, pct, ang in spec:
            v += amplitude * pct / 100.0 * math.sin(2 * math.pi * order * f0 * t + math.radians(ang))
        rows.append((g(t), g(v)))
    return rows


def main():
    os.makedirs(os.path.join(ROOT, "spectra"), exist_ok=True)
    os.makedirs(os.path.join(ROOT, "profiles"), exist_ok=True)
    os.makedirs(os.path.join(ROOT, "waveforms"), exist_ok=True)

    for s in (1, 2, 3):
        with open(os.path.join(ROOT, "feeder_scenario%d.json" % s), "w", newline="\n") as f:
            json.dump(feeder(s), f, indent=2)
            f.write("\n")

    for name, entries in SPECTRA.items():
        write_csv(os.path.join(ROOT, "spectra", name + ".csv"), "order,percent,angle_deg",
                  [(str(o), g(p), g(a)) for o, p, a in entries])

    for name, values in profiles().items():
        write_csv(os.path.join(ROOT, "profiles", name + ".csv"), "minute,multiplier",
                  [(str(m), g(v)) for m, v in enumerate(values)])

    # 20 kHz capture rounded to 333 samples per cycle, 12 cycles.
    for name in ("scenario1_current", "scenario2_current"):
        write_csv(os.path.join(ROOT, "waveforms", name + ".csv"), "time_s,value",
                  waveform(SPECTRA[name], 100.0, 19980.0, 12))
    write_csv(os.path.join(ROOT, "waveforms", "two_tone.csv"), "time_s,value",
              waveform([(1, 100, 0), (3, 20, 30)], 1.0, 19980.0, 12))
    return 0


if __name__ == "__main__":
    sys.exit(main())
