#!/usr/bin/env python3
"""Write the bundled CSV files used by the tests and the default CLI run.

They follow the usual optimization-table header convention (Uppercase =
numeric, lowercase = symbolic, trailing +/- = goal to maximize/minimize,
trailing X = ignored, ? = missing). They are synthetic look-alikes of a few
well known tables, not copies. Deterministic: same output on every run.

    python3 data/make_standins.py
"""

import csv
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def write(name, header, rows):
    with open(os.path.join(HERE, name), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["?" if v is None else fmt(v) for v in r])


def fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}" if abs(v) < 1e4 else f"{v:.0f}"
    return str(v)


def ssa_like():
    # 12 x 14 x 9 = 1512 configurations, two conflicting costs, a narrow
    # sweet spot that lowers both, and a few pathological configurations
    rng = random.Random(7)
    xs, ys = [], []
    for x1 in range(12):
        for x2 in range(14):
            for x3 in range(9):
                t1 = ((x1 - 10) / 11) ** 2 + ((x2 - 2) / 13) ** 2 + 0.5 * ((x3 - 7) / 8) ** 2
                t2 = ((x1 - 2) / 11) ** 2 + ((x2 - 11) / 13) ** 2 + 0.5 * ((x3 - 1) / 8) ** 2
                d2 = ((x1 - 7) / 11) ** 2 + ((x2 - 5) / 13) ** 2 + ((x3 - 5) / 8) ** 2
                dip = 1 - 0.3 * math.exp(-d2 / 0.12 ** 2)
                xs.append([x1, x2, x3])
                ys.append([100 * math.exp(t1) * dip * (1 + 0.03 * rng.random()),
                           40 * math.exp(t2) * dip * (1 + 0.03 * rng.random())])
    for j in range(2):
        col = [y[j] for y in ys]
        lo, hi = min(col), max(col)
        for i in rng.sample(range(len(ys)), 5):
            ys[i][j] = lo + (hi - lo) * 1.3 * rng.uniform(0.9, 1.0)
    rows = [x + [round(a, 3), round(b, 3)] for x, (a, b) in zip(xs, ys)]
    write("ssa_like.csv", ["Threads", "Cache", "Level", "Runtime-", "Energy-"], rows)


def auto_like():
    rng = random.Random(93)
    rows = []
    for _ in range(398):
        cyl = rng.choice([4, 4, 4, 6, 6, 8])
        vol = cyl * rng.uniform(20, 45)
        hp = vol * rng.uniform(0.35, 0.6)
        year = rng.randint(70, 82)
        origin = rng.choice(["1", "1", "2", "3"]) if cyl == 4 else "1"
        lbs = 1200 + 7.5 * vol + rng.gauss(0, 200)
        acc = max(8.0, 24 - hp / 12 + rng.gauss(0, 1.5))
        mpg = max(9.0, 52 - lbs / 120 + 0.6 * (year - 70) + (3 if origin != "1" else 0) + rng.gauss(0, 2.5))
        rows.append([cyl, round(vol), round(hp) if rng.random() > 0.02 else None, year, origin,
                     round(lbs), round(acc, 1), round(mpg)])
    write("auto93_like.csv", ["Clndrs", "Volume", "HpX", "Model", "origin", "Lbs-", "Acc+", "Mpg+"], rows)


LEVELS = ["vl", "l", "n", "h", "vh", "xh"]
DRIVERS = ["rely", "data", "cplx", "time", "stor", "virt", "turn", "acap", "aexp",
           "pcap", "vexp", "lexp", "modp", "tool", "sced"]
# effort multiplier per level step; negative = capability (higher is cheaper)
SLOPE = [0.08, 0.05, 0.1, 0.08, 0.05, 0.04, 0.04, -0.1, -0.05, -0.08, -0.04, -0.03, -0.05, -0.05, 0.04]


def nasa_like():
    rng = random.Random(22)
    rows = []
    for _ in range(93):
        levels = [rng.choice(range(1, 5)) for _ in DRIVERS]
        kloc = round(math.exp(rng.uniform(math.log(2), math.log(400))), 1)
        scale = [rng.randint(1, 6) for _ in range(5)]
        year = rng.randint(1971, 1987)
        em = math.prod(1 + s * (lv - 2) for s, lv in zip(SLOPE, levels))
        b = 0.91 + 0.01 * sum(scale)
        effort = 2.94 * kloc ** b * em * math.exp(rng.gauss(0, 0.2))
        months = 3.67 * effort ** 0.3 * math.exp(rng.gauss(0, 0.1))
        defects = kloc * (6 - 0.3 * sum(lv - 2 for lv in levels[7:13])) * math.exp(rng.gauss(0, 0.25))
        rows.append([LEVELS[lv] for lv in levels] + [kloc] + scale + [year]
                    + [round(effort, 1), round(max(defects, 1.0), 1), round(months, 1)])
    header = DRIVERS + ["Kloc", "Prec", "Flex", "Resl", "Team", "Pmat", "Year", "Effort-", "Defects-", "Months-"]
    write("nasa93dem_like.csv", header, rows)


def pom_like():
    rng = random.Random(3)
    rows = []
    for _ in range(500):
        culture = rng.uniform(0.1, 0.9)
        crit = rng.uniform(0.82, 1.2)
        crit_mod = rng.uniform(0.02, 0.1)
        known = rng.uniform(0.4, 0.7)
        inter = rng.uniform(1, 100)
        dyn = rng.uniform(1, 50)
        size = rng.choice([3, 10, 30, 100, 300])
        plan = rng.randint(0, 4)
        team = rng.uniform(1, 44)
        cost = (size * crit * (1 + inter / 200) * (1 + dyn / 100) / (0.5 + culture)
                * (1 + abs(plan - 2) * 0.1) * (1 + abs(team - 20) / 60) * rng.uniform(0.9, 1.1))
        score = (known + 0.3 * culture - dyn / 200 - crit_mod * 2 + 0.05 * plan) * rng.uniform(0.95, 1.05)
        idle = (team / 44 * 0.5 + dyn / 100 + (0.2 if plan in (0, 4) else 0)) * rng.uniform(0.8, 1.2)
        rows.append([round(culture, 3), round(crit, 3), round(crit_mod, 3), round(known, 3), round(inter, 1),
                     round(dyn, 1), size, plan, round(team, 1), round(cost, 2), round(score, 4), round(idle, 4)])
    header = ["Culture", "Criticality", "CriticalityModifier", "InitialKnown", "InterDependency",
              "Dynamism", "Size", "Plan", "TeamSize", "Cost-", "Score+", "Idle-"]
    write("pom3_like.csv", header, rows)


def xomo_like():
    rng = random.Random(24)
    names = ["Aa", "Sced", "Cplx", "Site", "Resl", "Acap", "Etat", "Rely", "Data", "Prec", "Pmat", "Aexp",
             "Flex", "Pcon", "Tool", "Time", "Stor", "Docu", "B", "Plex", "Pcap", "Kloc", "Ltex", "Pr"]
    slope = [rng.uniform(-0.12, 0.12) for _ in names]
    rows = []
    for _ in range(1000):
        xs = [rng.randint(1, 6) for _ in names]
        kloc_i = names.index("Kloc")
        xs[kloc_i] = rng.randint(2, 500)
        em = math.prod(1 + s * (v - 3) for i, (s, v) in enumerate(zip(slope, xs)) if i != kloc_i)
        effort = 2.5 * xs[kloc_i] ** 1.05 * em * math.exp(rng.gauss(0, 0.15))
        months = 3.5 * effort ** 0.32 * math.exp(rng.gauss(0, 0.08))
        defects = xs[kloc_i] * 8 * (1.2 - 0.04 * (xs[5] + xs[20])) * math.exp(rng.gauss(0, 0.2))
        risk = sum(abs(v - 3) for i, v in enumerate(xs) if i != kloc_i) * rng.uniform(0.8, 1.2)
        rows.append(xs + [round(effort, 1), round(months, 2), round(max(defects, 1.0), 1), round(risk, 2)])
    write("xomo_like.csv", names + ["Effort-", "Months-", "Defects-", "Risk-"], rows)


def health_like():
    rng = random.Random(8)
    rows = []
    for _ in range(800):
        sleep = rng.uniform(4, 10)
        steps = rng.uniform(1000, 18000)
        cal = rng.uniform(1400, 3600)
        water = rng.uniform(0.5, 4)
        stress = rng.randint(1, 10)
        screen = rng.uniform(1, 12)
        age = rng.randint(18, 80)
        work = rng.uniform(0, 70)
        bp = 100 + 0.5 * age + 2 * stress - steps / 2000 + (7 - sleep) ** 2 + rng.gauss(0, 5)
        weight = 50 + (cal - 2000) / 40 - steps / 1500 + 0.1 * age + rng.gauss(0, 4)
        mood = 5 - abs(sleep - 8) - 0.3 * stress + steps / 6000 - screen / 6 - abs(work - 35) / 20 + rng.gauss(0, 0.7)
        row = [round(sleep, 1), round(steps), round(cal), round(water, 1), stress, round(screen, 1), age,
               round(work, 1), round(bp, 1), round(weight, 1), round(mood, 2)]
        if rng.random() < 0.03:
            row[rng.randrange(8)] = None
        rows.append(row)
    header = ["Sleep", "Steps", "Calories", "Water", "Stress", "Screen", "Age", "Work", "Bp-", "Weight-", "Mood+"]
    write("health_like.csv", header, rows)


def toy():
    rng = random.Random(1)
    rows = []
    for _ in range(60):
        size = rng.randint(1, 20)
        speed = round(rng.uniform(0, 10), 2)
        colour = rng.choice(["red", "green", "blue"])
        cost = round(size * 3 + speed ** 1.5 + (5 if colour == "blue" else 0) + rng.uniform(0, 4), 2)
        quality = round(10 * speed / (1 + abs(size - 12)) + (3 if colour == "green" else 0) + rng.uniform(0, 2), 2)
        rows.append([size, speed, colour, cost, quality])
    write("toy.csv", ["Size", "Speed", "colour", "Cost-", "Quality+"], rows)


if __name__ == "__main__":
    ssa_like()
    auto_like()
    nasa_like()
    pom_like()
    xomo_like()
    health_like()
    toy()
