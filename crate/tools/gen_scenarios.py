"""Generates the bundled scenario fixtures in scenarios/.

Fov cells are rectangular windows filtered by line of sight from the camera
mount, sampled along the segment between cell centres.
"""
import math
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "scenarios"


def los(blocked, a, b):
    (x0, y0), (x1, y1) = a, b
    n = max(1, int(math.ceil(math.hypot(x1 - x0, y1 - y0) * 8)))
    for i in range(n + 1):
        t = i / n
        c = (round(x0 + (x1 - x0) * t), round(y0 + (y1 - y0) * t))
        if c in blocked:
            return False
    return True


def window(w, h, blocked, mount, x0, x1, y0, y1):
    cells = []
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            if 0 <= x < w and 0 <= y < h and (x, y) not in blocked and los(blocked, mount, (x, y)):
                cells.append((x, y))
    return cells


def fmt_cells(cells):
    return "[" + ", ".join(f"[{x}, {y}]" for x, y in cells) + "]"


def emit(name, header, w, h, blocked, ascii_rows, cameras, targets, comment):
    lines = [f"# {line}" for line in comment]
    lines += [f'name = "{name}"', "tau = 100", "seed = 1", "", "[map]"]
    if ascii_rows:
        lines.append('ascii = """')
        lines += ascii_rows
        lines.append('"""')
    else:
        lines += [f"width = {w}", f"height = {h}"]
        if blocked:
            lines.append(f"blocked = {fmt_cells(sorted(blocked, key=lambda c: (c[1], c[0])))}")
    for cid, (mount, states) in enumerate(cameras):
        lines += ["", "[[cameras]]", f"id = {cid}", f"# mounted at {mount}", "states = ["]
        for s in states:
            lines.append(f"    {{ fov = {fmt_cells(s)} }},")
        lines.append("]")
    lines += ["", "[targets]", f"count = {targets}", "", "[controller]", 'kind = "pomdp"', ""]
    (OUT / f"{name}.scn").write_text("\n".join(lines))
    return sum(1 for y in range(h) for x in range(w) if (x, y) not in blocked)


def hall():
    w, h = 20, 10
    blocked = set()
    cams = []
    for mount, xs in [((0, 0), 0), ((19, 0), 10), ((0, 9), 0), ((19, 9), 10)]:
        top = mount[1] == 0
        y0, y1 = (0, 4) if top else (5, 9)
        states = [window(w, h, blocked, mount, xs + 3 * i, xs + 3 * i + 3, y0, y1) for i in range(3)]
        cams.append((mount, states))
    n = emit("hall", None, w, h, blocked, None, cams, 5,
             ["Open hall, 20 x 10 cells, four corner-mounted cameras with three states each.",
              "Approximates an open-room layout; fov windows are chosen, not measured."])
    assert n == 200, n


def corridor():
    w, h = 40, 5
    blocked = set()
    cams = []
    for i, mount in enumerate([(0, 2), (13, 0), (26, 4), (39, 2)]):
        base = 10 * i
        states = [window(w, h, blocked, mount, base + 4 * s - 1, base + 4 * s + 2, 0, 4) for s in range(3)]
        cams.append((mount, states))
    emit("corridor", None, w, h, blocked, None, cams, 5,
         ["Long corridor, 40 x 5 cells, four wall-mounted cameras with three states each.",
          "Approximates a corridor layout; fov windows are chosen, not measured."])


def junction():
    w, h = 20, 16
    free = set()
    for y in range(h):
        for x in range(w):
            if 4 <= y <= 9 or 7 <= x <= 12:
                free.add((x, y))
    pillar = {(x, y) for x in range(9, 11) for y in range(4, 10)}
    free -= pillar
    blocked = {(x, y) for y in range(h) for x in range(w)} - free
    rows = ["".join("." if (x, y) in free else "#" for x in range(w)) for y in range(h)]
    cams = [
        ((0, 4), [window(w, h, blocked, (0, 4), 2, 4, 4, 9),
                  window(w, h, blocked, (0, 4), 5, 6, 4, 9),
                  window(w, h, blocked, (0, 4), 7, 8, 4, 9)]),
        ((19, 9), [window(w, h, blocked, (19, 9), 15, 17, 4, 9),
                   window(w, h, blocked, (19, 9), 13, 14, 4, 9),
                   window(w, h, blocked, (19, 9), 11, 12, 4, 9)]),
        ((12, 0), [window(w, h, blocked, (12, 0), 7, 12, 1, 3),
                   window(w, h, blocked, (12, 0), 7, 12, 4, 5),
                   window(w, h, blocked, (12, 0), 7, 8, 4, 9)]),
        ((7, 15), [window(w, h, blocked, (7, 15), 7, 12, 12, 14),
                   window(w, h, blocked, (7, 15), 7, 12, 10, 11),
                   window(w, h, blocked, (7, 15), 11, 12, 4, 9)]),
    ]
    n = emit("junction", None, w, h, blocked, rows, cams, 10,
             ["Four-way junction, 20 x 16 grid with 168 free cells after a 2 x 6 pillar",
              "at the crossing. Four cameras with three states each; fov windows are",
              "line-of-sight filtered from each mount and chosen, not measured.",
              "The outermost rows and columns of each arm are never observed."])
    assert n == 168, n


if __name__ == "__main__":
    hall()
    corridor()
    junction()
