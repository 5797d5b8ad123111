"""Random generators for well-formed app models and handler programs.

The builders take a ``random.Random`` so acceptance tests can run large
seeded batches cheaply; ``app_models()`` wraps them for hypothesis.
"""

import random

from hypothesis import strategies as st

from lifeguard.model import (
    LIFECYCLE_CALLBACKS,
    ActivityModel,
    AppModel,
    Assign,
    BundlePut,
    Concat,
    Crash,
    DismissDialog,
    Finish,
    Literal,
    Navigate,
    Noop,
    Restore,
    ShowDialog,
    SinkCall,
    VarRef,
    WidgetModel,
    WidgetRead,
    WidgetRef,
    WidgetWrite,
)

TYPES = ("EditText", "Spinner", "CheckBox", "Switch", "TextView", "Button", "ImageView")
EDITABLE = ("EditText", "Spinner", "CheckBox", "Switch")
VARS = ("a", "b", "c")
LITS = ("", "x", "y", "42")
SINK_CALLS = (
    ("android.content.SharedPreferences$Editor", "putString"),
    ("android.database.sqlite.SQLiteDatabase", "insertOrThrow"),
    ("java.io.BufferedWriter", "write"),
    ("com.example.Repo", "saveAll"),
    ("android.util.Log", "d"),
    ("com.example.Net", "post"),
)


def gen_widget(rng: random.Random, wid: str) -> WidgetModel:
    type_name = rng.choice(TYPES)
    if type_name in ("CheckBox", "Switch"):
        props, relevant = {"checked": rng.choice(("true", "false"))}, ("checked",)
    elif type_name == "ImageView":
        props, relevant = {"src": rng.choice(LITS)}, ()
    else:
        props, relevant = {"text": rng.choice(LITS)}, ("text",)
    if rng.random() < 0.3:
        props["hint"] = rng.choice(LITS)
    return WidgetModel(wid, type_name, props, relevant)


def gen_expr(rng: random.Random, cells, defined, depth: int = 2):
    choices = ["lit"] + (["cell"] if cells else []) + (["var"] if defined else [])
    if depth > 0:
        choices.append("concat")
    kind = rng.choice(choices)
    if kind == "cell":
        return WidgetRef(*rng.choice(cells))
    if kind == "var":
        return VarRef(rng.choice(sorted(defined)))
    if kind == "concat":
        return Concat(gen_expr(rng, cells, defined, depth - 1), gen_expr(rng, cells, defined, depth - 1))
    return Literal(rng.choice(LITS))


def gen_program(rng: random.Random, cells, targets=(), *, control=True, stores=False, max_size=8):
    """A loop-free handler body; variables are always assigned before use."""
    kinds = ["assign", "sink", "sink", "noop"]
    if cells:
        kinds += ["write", "read", "read"]
    if control:
        kinds += ["dialog", "crash"] + (["navigate", "finish"] if targets else [])
    if stores and cells:
        kinds += ["put", "restore"]
    defined: set[str] = set()
    body = []
    for _ in range(rng.randint(0, max_size)):
        kind = rng.choice(kinds)
        if kind == "assign":
            stmt = Assign(rng.choice(VARS), gen_expr(rng, cells, defined))
            defined.add(stmt.var)
        elif kind == "read":
            stmt = WidgetRead(rng.choice(VARS), *rng.choice(cells))
            defined.add(stmt.var)
        elif kind == "write":
            stmt = WidgetWrite(*rng.choice(cells), gen_expr(rng, cells, defined))
        elif kind == "sink":
            cls, method = rng.choice(SINK_CALLS)
            stmt = SinkCall(cls, method, tuple(gen_expr(rng, cells, defined) for _ in range(rng.randint(0, 3))))
        elif kind == "dialog":
            stmt = rng.choice((ShowDialog("d1"), DismissDialog("d1"), ShowDialog("d2")))
        elif kind == "crash":
            stmt = Crash(rng.choice(("boom", "npe")))
        elif kind == "navigate":
            stmt = Navigate(rng.choice(targets))
        elif kind == "finish":
            stmt = Finish()
        elif kind == "put":
            stmt = BundlePut("session", rng.choice(("k1", "k2")), gen_expr(rng, cells, defined))
        elif kind == "restore":
            stmt = Restore("session", rng.choice(("k1", "k2")), *rng.choice(cells))
        else:
            stmt = Noop()
        body.append(stmt)
    return tuple(body)


def cells_of(widgets):
    return [(w.id, p) for w in widgets for p in sorted(w.properties)]


def gen_activity(rng: random.Random, aid, targets, *, control=True, stores=False, max_widgets=4):
    widgets = tuple(gen_widget(rng, f"w{i}") for i in range(rng.randint(0, max_widgets)))
    cells = cells_of(widgets)
    keys = [f"tap:{w.id}" for w in widgets]
    keys += [f"text_changed:{w.id}" for w in widgets if w.type_name in EDITABLE]
    keys += list(LIFECYCLE_CALLBACKS)
    chosen = rng.sample(keys, rng.randint(0, min(4, len(keys))))
    handlers = {k: gen_program(rng, cells, targets, control=control, stores=stores) for k in sorted(chosen)}
    return ActivityModel(aid, widgets, handlers)


def gen_app(rng: random.Random, *, control=True, stores=False, max_activities=3, max_widgets=4) -> AppModel:
    ids = [f"act{i}" for i in range(rng.randint(1, max_activities))]
    acts = tuple(
        gen_activity(rng, aid, ids, control=control, stores=stores, max_widgets=max_widgets) for aid in ids
    )
    prefs = {k: rng.choice(LITS) for k in rng.sample(("p1", "p2"), rng.randint(0, 2))}
    return AppModel(f"app{rng.randrange(1000)}", acts, ids[0], prefs)


def app_models(**kwargs):
    return st.integers(0, 2**32 - 1).map(lambda seed: gen_app(random.Random(seed), **kwargs))
