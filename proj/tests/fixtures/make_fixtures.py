"""Regenerates the desk-scale fixture ecosystem.

Output is committed; rerun only when the fixture design changes:
    python3 tests/fixtures/make_fixtures.py
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(2021)

START = (2016, 1)
END = (2020, 12)


def month_index(y, m):
    return y * 12 + m - 1


def month_of(i):
    return i // 12, i % 12 + 1


def stamp(i, day, hour=12):
    y, m = month_of(i)
    return f"{y:04d}-{m:02d}-{day:02d}T{hour:02d}:{rng.randrange(60):02d}:00.000Z"


first = month_index(*START)
last = month_index(*END)

# Libraries and when (if ever) apps start abandoning them.
libs = {
    "ajax-lite": None,
    "chalkish": None,
    "deep-merge": month_index(2018, 9),
    "event-pipe": None,
    "fmt-date": month_index(2019, 2),
    "glob-walk": None,
    "http-client": None,
    "left-trim": month_index(2018, 11),
    "mini-router": month_index(2019, 8),
    "promise-x": None,
    "query-str": month_index(2020, 1),
    "yaml-read": None,
}
for i in range(18):
    libs[f"util-{i:02d}"] = None
core = ["core-util", "core-assert", "core-types"]
apps = [f"app-{i:03d}" for i in range(400)]

# Zipf-like popularity; the named libraries sit near the top.
popularity = {name: 1.0 / (1 + rank) ** 0.8 for rank, name in enumerate(libs)}


def lib_weight(lib, t):
    onset = libs[lib]
    w = popularity[lib]
    if onset is not None and t >= onset:
        w *= 0.85 ** (t - onset)
    return w


docs = []


def publish(name, releases):
    versions, times = {}, {"created": releases[0][1]}
    for ver, when, deps in releases:
        versions[ver] = {"name": name, "version": ver, "dependencies": {d: "^1.0.0" for d in sorted(deps)}}
        times[ver] = when
    times["modified"] = releases[-1][1]
    docs.append({"_id": name, "name": name, "versions": versions, "time": times})


for c in core:
    publish(c, [("1.0.0", stamp(first, 2), set())])

for lib in libs:
    releases = []
    t = first + rng.randrange(3)
    minor = 0
    while t <= last:
        deps = set(rng.sample(core, rng.randrange(1, 3)))
        releases.append((f"1.{minor}.0", stamp(t, rng.randrange(1, 28)), deps))
        minor += 1
        t += rng.randrange(4, 9)
    publish(lib, releases)

lib_names = sorted(libs)
for app in apps:
    releases = []
    t = first + rng.randrange(14)
    major = 1
    minor = 0
    while t <= last:
        weights = [lib_weight(l, t) for l in lib_names]
        k = rng.randrange(3, 7)
        deps = set()
        while len(deps) < k:
            deps.add(rng.choices(lib_names, weights)[0])
        releases.append((f"{major}.{minor}.0", stamp(t, rng.randrange(1, 28)), deps))
        minor += 1
        if rng.random() < 0.15:
            major += 1
            minor = 0
        t += rng.randrange(2, 5)
    publish(app, releases)

# A backport: app-03 ships 1.9.9 after its 2.x line started; it must be ignored.
for d in docs:
    if d["name"] == "app-03":
        late = sorted(d["time"][v] for v in d["versions"])[-1]
        d["versions"]["1.9.9"] = {"name": "app-03", "version": "1.9.9", "dependencies": {"left-trim": "1"}}
        d["time"]["1.9.9"] = late.replace("T12", "T23")

with open(HERE / "feed.ndjson", "w") as f:
    f.write(json.dumps({"_id": "_design/app", "language": "javascript", "views": {}}) + "\n")
    for d in docs:
        f.write(json.dumps({"id": d["_id"], "seq": rng.randrange(10**6), "doc": d}, sort_keys=True) + "\n")
    f.write(json.dumps({"_id": "removed-pkg", "_deleted": True}) + "\n")


def r2(x):
    return f"{min(1.0, max(0.0, x)):.3f}"


# npms snapshots: 2018-12, 2019-04, 2019-06.
s1, s2, s3 = {}, {}, {}
for lib, onset in libs.items():
    base = rng.uniform(0.93, 0.97)
    s1[lib] = base
    s2[lib] = base + rng.uniform(-0.004, 0.004)
    if onset is not None and onset <= month_index(2019, 6):
        s3[lib] = s2[lib] - rng.uniform(0.205, 0.22)
    else:
        s3[lib] = s2[lib] + rng.uniform(0.0, 0.02)
for app in apps:
    base = rng.uniform(0.6, 0.95)
    s1[app] = base
    s2[app] = base + rng.uniform(-0.02, 0.02)
    s3[app] = s2[app] + rng.uniform(-0.3, 0.05)
for c in core:
    s1[c] = s2[c] = s3[c] = 0.8
for name, snap in (("npms_2018-12.csv", s1), ("npms_2019-04.csv", s2), ("npms_2019-06.csv", s3)):
    with open(HERE / name, "w") as f:
        f.write("package,score\n")
        for p in sorted(snap):
            f.write(f"{p},{r2(snap[p])}\n")

with open(HERE / "deprecated.csv", "w") as f:
    f.write("package,date,is_real_deprecation\n")
    f.write("deep-merge,2019-05-14,true\n")
    f.write("left-trim,2019-08-02,true\n")
    f.write("fmt-date,2020-02-20,true\n")
    f.write("mini-router,2020-06-30,true\n")
    f.write("glob-walk,2020-05-01,false\n")

with open(HERE / "survey.csv", "w") as f:
    f.write("package,awareness,usage,interest,satisfaction\n")
    f.write("http-client,0.93,0.71,0.64,0.88\n")
    f.write("mini-router,0.81,0.40,0.22,0.41\n")
    f.write("promise-x,0.77,0.52,0.47,0.79\n")
    f.write("fmt-date,0.66,0.31,0.18,0.37\n")
    f.write("yaml-read,0.58,0.44,0.51,0.83\n")


def history(name, fn):
    with open(HERE / name, "w") as f:
        f.write("package,month,value\n")
        for lib in lib_names:
            for t in range(first, last + 1):
                y, m = month_of(t)
                f.write(f"{lib},{y:04d}-{m:02d},{fn(lib, t)}\n")


def stars(lib, t):
    onset = libs[lib]
    grow = 40 * (t - first)
    if onset is not None and t > onset + 2:
        return 1000 + 40 * (onset + 2 - first) - 25 * (t - onset - 2)
    return 1000 + grow


def forks(lib, t):
    onset = libs[lib]
    if onset is not None and t > onset:
        return 200 + 6 * (onset - first) - 4 * (t - onset) + (t % 3)
    return 200 + 6 * (t - first) + (t % 3)


def downloads(lib, t):
    return int(50000 * (0.5 + lib_weight(lib, t) / popularity[lib]) + 1000 * ((t * 7919) % 13))


history("stars.csv", stars)
history("forks.csv", forks)
history("downloads.csv", downloads)
