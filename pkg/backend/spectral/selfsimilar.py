"""
Self-similar graph towers G_1 < G_2 < ... built from a seed graph by taking k
disjoint copies and gluing their connecting vertices (ports), pattern
invariant operators with finite propagation, their spectral tower and the
r-pattern census of a graph.

Ports are an ordered tuple S_n. A glue edge ((c1, s1), (c2, s2)) joins port
s1 of copy c1 to port s2 of copy c2; copy -1 is the last copy. Copy c of G_n
occupies the vertex range [c |V_n|, (c + 1) |V_n|), so the first copy is
G_n itself.
"""

# Built-in imports
import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# External imports
import networkx as nx
import numpy as np

# Own imports
from common.exceptions import CapExceededError, SelfSimilarSpecError, SpecParseError
from common.logger import custom_logger
from spectral.linalg import RANK_TOL, SymMatrix, numerical_rank, spectral_distribution
from spectral.rankring import Mapper
from spectral.stepfn import StepFunction, sup_distance, sup_distance_to

logger = custom_logger()

MAX_VERTICES = 2**20
DENSE_LIMIT = 4096
PERTURBATION_SLACK = 1e-8
ALL_PORTS = "*"

PortRef = Tuple[int, int]
GlueEdge = Tuple[PortRef, PortRef]
# (copy, port slot); a slot of None selects every port of the copy
SelectRef = Tuple[int, Optional[int]]


def _pair(value, what: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SpecParseError(f"{what} must be a pair, got {value!r}")
    return tuple(value)


def _parse_glue(raw) -> Tuple[GlueEdge, ...]:
    glue = []
    for edge in raw:
        first, second = _pair(edge, "glue edge")
        glue.append(
            (
                tuple(int(v) for v in _pair(first, "port reference")),
                tuple(int(v) for v in _pair(second, "port reference")),
            )
        )
    return tuple(glue)


def _parse_select(raw) -> Tuple[SelectRef, ...]:
    select = []
    for ref in raw:
        copy, slot = _pair(ref, "select entry")
        select.append((int(copy), None if slot == ALL_PORTS else int(slot)))
    return tuple(select)


@dataclass(frozen=True)
class SelfSimilarSpec:
    """
    Seed graph G_1 on vertices 0..n_vertices-1 with ordered ports S_1, the
    number of copies k, the degree bound, the glue template (optionally
    replaced at given levels) and the port selection template.
    """

    n_vertices: int
    edges: Tuple[Tuple[int, int], ...]
    ports: Tuple[int, ...]
    k: int
    degree_bound: int
    glue: Tuple[GlueEdge, ...]
    select: Tuple[SelectRef, ...]
    glue_overrides: Tuple[Tuple[int, Tuple[GlueEdge, ...]], ...] = ()
    strict_disjoint: bool = False
    name: str = "custom"
    kernel: Optional[str] = None

    def __post_init__(self):
        if self.n_vertices < 1:
            raise SpecParseError("the seed graph needs at least one vertex")
        if self.k < 2:
            raise SpecParseError(f"copies per level must be at least 2, got {self.k}")
        if self.degree_bound < 1:
            raise SpecParseError("degree bound must be positive")
        for u, v in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices) or u == v:
                raise SpecParseError(f"invalid seed edge {(u, v)}")
        if len(set(self.ports)) != len(self.ports):
            raise SpecParseError("ports must be distinct")
        if any(not 0 <= p < self.n_vertices for p in self.ports):
            raise SpecParseError(f"ports {self.ports} outside the seed graph")
        if not self.select:
            raise SpecParseError("the select template must name at least one port")
        seed = self.seed_graph()
        if max((deg for _, deg in seed.degree()), default=0) > self.degree_bound:
            raise SpecParseError("the seed graph already exceeds the degree bound")

    def seed_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_vertices))
        graph.add_edges_from(self.edges)
        return graph

    def glue_for(self, level: int) -> Tuple[GlueEdge, ...]:
        """Glue edges used to build G_{level+1} from G_level."""
        return dict(self.glue_overrides).get(level, self.glue)

    def vertex_count(self, n: int) -> int:
        return self.k ** (n - 1) * self.n_vertices

    @classmethod
    def from_dict(cls, data: dict) -> "SelfSimilarSpec":
        """Parse a self-similar spec document (see README for the schema)."""
        try:
            overrides = tuple(
                sorted(
                    (int(level), _parse_glue(glue))
                    for level, glue in data.get("glue_overrides", {}).items()
                )
            )
            return cls(
                n_vertices=int(data["vertices"]),
                edges=tuple(
                    tuple(int(v) for v in _pair(e, "seed edge")) for e in data["edges"]
                ),
                ports=tuple(int(p) for p in data["ports"]),
                k=int(data["copies"]),
                degree_bound=int(data["degree_bound"]),
                glue=_parse_glue(data["glue"]),
                select=_parse_select(data["select"]),
                glue_overrides=overrides,
                strict_disjoint=bool(data.get("strict_disjoint", False)),
                name=str(data.get("name", "custom")),
                kernel=data.get("kernel"),
            )
        except SpecParseError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SpecParseError(f"invalid self-similar spec: {exc}") from exc

    def to_dict(self) -> dict:
        def glue_list(glue):
            return [[list(a), list(b)] for a, b in glue]

        data = {
            "name": self.name,
            "vertices": self.n_vertices,
            "edges": [list(e) for e in self.edges],
            "ports": list(self.ports),
            "copies": self.k,
            "degree_bound": self.degree_bound,
            "glue": glue_list(self.glue),
            "select": [
                [copy, ALL_PORTS if slot is None else slot] for copy, slot in self.select
            ],
            "strict_disjoint": self.strict_disjoint,
        }
        if self.glue_overrides:
            data["glue_overrides"] = {
                str(level): glue_list(glue) for level, glue in self.glue_overrides
            }
        if self.kernel is not None:
            data["kernel"] = self.kernel
        return data


def path_spec() -> SelfSimilarSpec:
    """Two-vertex seed, ends as ports, right end of copy 0 glued to left end of copy 1."""
    return SelfSimilarSpec(
        n_vertices=2,
        edges=((0, 1),),
        ports=(0, 1),
        k=2,
        degree_bound=2,
        glue=(((0, 1), (1, 0)),),
        select=((0, 0), (-1, 1)),
        name="path",
        kernel="laplacian",
    )


@dataclass(frozen=True, eq=False)
class SelfSimilarLevel:
    level: int
    graph: nx.Graph
    ports: Tuple[int, ...]
    disjoint: bool
    glue_endpoints: Tuple[int, ...] = ()

    @property
    def n_vertices(self) -> int:
        return self.graph.number_of_nodes()


def _copy_index(copy: int, k: int, what) -> int:
    if not -k <= copy < k:
        raise SelfSimilarSpecError(f"copy index {copy} outside 0..{k - 1}", edge=what)
    return copy % k


def _port_vertex(ref: PortRef, ports: Tuple[int, ...], size: int, k: int, what) -> int:
    copy, slot = ref
    copy = _copy_index(copy, k, what)
    if not 0 <= slot < len(ports):
        raise SelfSimilarSpecError(
            f"port slot {slot} outside the {len(ports)} connecting vertices", edge=what
        )
    return copy * size + ports[slot]


def _next_level(spec: SelfSimilarSpec, current: SelfSimilarLevel) -> SelfSimilarLevel:
    size, k, ports = current.n_vertices, spec.k, current.ports
    graph = nx.Graph()
    graph.add_nodes_from(range(k * size))
    for c in range(k):
        graph.add_edges_from((u + c * size, v + c * size) for u, v in current.graph.edges)

    endpoints = set()
    for edge in spec.glue_for(current.level):
        u = _port_vertex(edge[0], ports, size, k, edge)
        v = _port_vertex(edge[1], ports, size, k, edge)
        if u // size == v // size:
            raise SelfSimilarSpecError("glue edge joins a copy to itself", edge=edge)
        if graph.has_edge(u, v):
            raise SelfSimilarSpecError("duplicate glue edge", edge=edge)
        graph.add_edge(u, v)
        if graph.degree(u) > spec.degree_bound or graph.degree(v) > spec.degree_bound:
            raise SelfSimilarSpecError(
                f"glue edge exceeds the degree bound {spec.degree_bound}", edge=edge
            )
        endpoints.update((u, v))

    selected = []
    for copy, slot in spec.select:
        c = _copy_index(copy, k, (copy, slot))
        slots = range(len(ports)) if slot is None else [slot]
        for s in slots:
            selected.append(_port_vertex((c, s), ports, size, k, (copy, slot)))
    if len(set(selected)) != len(selected):
        raise SelfSimilarSpecError("select template picks a port twice")
    disjoint = all(v >= size for v in selected)
    if spec.strict_disjoint and not disjoint:
        offending = next(v for v in selected if v < size)
        raise SelfSimilarSpecError(
            f"new connecting vertex {offending} lies in G_{current.level}"
        )
    return SelfSimilarLevel(
        level=current.level + 1,
        graph=graph,
        ports=tuple(selected),
        disjoint=current.disjoint and disjoint,
        glue_endpoints=tuple(sorted(endpoints)),
    )


def build_tower(
    spec: SelfSimilarSpec, n: int, max_vertices: int = MAX_VERTICES
) -> List[SelfSimilarLevel]:
    """G_1 .. G_n with their ports."""
    if n < 1:
        raise ValueError(f"levels start at 1, got {n}")
    if spec.vertex_count(n) > max_vertices:
        raise CapExceededError(
            f"G_{n} has {spec.vertex_count(n)} vertices, cap is {max_vertices}",
            hint="lower the maximum level",
        )
    tower = [SelfSimilarLevel(1, spec.seed_graph(), spec.ports, True)]
    while tower[-1].level < n:
        tower.append(_next_level(spec, tower[-1]))
        logger.debug(
            f"built G_{tower[-1].level}: {tower[-1].n_vertices} vertices, "
            f"{len(tower[-1].ports)} ports"
        )
    return tower


def build_level(
    spec: SelfSimilarSpec, n: int, max_vertices: int = MAX_VERTICES
) -> SelfSimilarLevel:
    return build_tower(spec, n, max_vertices)[-1]


def folner_defect(graph: nx.Graph, vertices: int) -> float:
    """|{x < vertices with a neighbour >= vertices}| / vertices."""
    boundary = sum(
        1 for x in range(vertices) if any(y >= vertices for y in graph.adj[x])
    )
    return boundary / vertices


@dataclass(frozen=True)
class SelfSimilarCheck:
    ratios: List[float]
    folner_defects: List[float]
    disjoint: bool

    @property
    def self_similar(self) -> bool:
        """Finite-level diagnostic: the port ratio strictly decreases."""
        return len(self.ratios) >= 2 and all(
            b < a for a, b in zip(self.ratios, self.ratios[1:])
        )

    def to_dict(self) -> dict:
        return {
            "ratios": self.ratios,
            "folner_defects": self.folner_defects,
            "disjoint": self.disjoint,
            "self_similar": self.self_similar,
        }


def check_self_similar(
    spec: SelfSimilarSpec, levels: int, max_vertices: int = MAX_VERTICES
) -> SelfSimilarCheck:
    """|S_n| / |V(G_n)| for n = 1..levels and Folner defects of V(G_n) in G_levels."""
    tower = build_tower(spec, levels, max_vertices)
    deepest = tower[-1].graph
    check = SelfSimilarCheck(
        ratios=[len(t.ports) / t.n_vertices for t in tower],
        folner_defects=[folner_defect(deepest, t.n_vertices) for t in tower],
        disjoint=tower[-1].disjoint,
    )
    if not check.self_similar:
        logger.warning(f"spec {spec.name!r}: port ratios do not decrease", ratios=check.ratios)
    return check


def _refine(adjacency: List[List[int]], colours: List[int]) -> List[int]:
    while True:
        signatures = [
            (colours[v], tuple(sorted(colours[u] for u in adjacency[v])))
            for v in range(len(adjacency))
        ]
        ranks = {s: r for r, s in enumerate(sorted(set(signatures)))}
        refined = [ranks[s] for s in signatures]
        if len(ranks) == len(set(colours)):
            return refined
        colours = refined


def _search(adjacency, colours, marks) -> Tuple[tuple, List[int]]:
    colours = _refine(adjacency, colours)
    n = len(adjacency)
    if len(set(colours)) == n:
        edges = tuple(
            sorted(
                tuple(sorted((colours[u], colours[v])))
                for u in range(n)
                for v in adjacency[u]
                if u < v
            )
        )
        return (n, edges, tuple(colours[m] for m in marks)), colours
    sizes = {}
    for c in colours:
        sizes[c] = sizes.get(c, 0) + 1
    target = min(c for c, size in sizes.items() if size > 1)
    best = None
    for v in (u for u in range(n) if colours[u] == target):
        split = sorted(set((colours[u], u != v) for u in range(n)))
        ranks = {s: r for r, s in enumerate(split)}
        result = _search(adjacency, [ranks[(colours[u], u != v)] for u in range(n)], marks)
        if best is None or result[0] < best[0]:
            best = result
    return best


def _canonical(graph: nx.Graph, marks: Sequence = ()) -> Tuple[tuple, Dict]:
    nodes = sorted(graph.nodes)
    position = {node: m for m, node in enumerate(nodes)}
    adjacency = [[position[u] for u in graph.adj[node]] for node in nodes]
    marked = [position[m] for m in marks]
    initial = [
        (tuple(p for p, m in enumerate(marked) if m == v), len(adjacency[v]))
        for v in range(len(nodes))
    ]
    ranks = {s: r for r, s in enumerate(sorted(set(initial)))}
    certificate, colours = _search(adjacency, [ranks[s] for s in initial], marked)
    return certificate, {node: colours[position[node]] for node in nodes}


def canonical_form(graph: nx.Graph, marks: Sequence = ()) -> tuple:
    """
    Isomorphism certificate of a graph with an ordered tuple of marked
    vertices: equal certificates iff an isomorphism maps marks to marks in
    order. Colour refinement with individualization, minimum over branches.
    """
    return _canonical(graph, marks)[0]


@dataclass(frozen=True, eq=False)
class MarkedBall:
    """Canonically labelled r-ball around x with the marked pair (x, y)."""

    graph: nx.Graph
    x: int
    y: int
    distance: int


@dataclass(frozen=True)
class PatternKernel:
    radius: int
    rule: Callable[[MarkedBall], float]
    symmetric: bool = True
    name: str = "custom"

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("kernel propagation must be nonnegative")


def _laplacian_rule(ball: MarkedBall) -> float:
    if ball.distance == 0:
        return float(ball.graph.degree(ball.x))
    return -1.0 if ball.distance == 1 else 0.0


def _adjacency_rule(ball: MarkedBall) -> float:
    return 1.0 if ball.distance == 1 else 0.0


def laplacian_kernel() -> PatternKernel:
    return PatternKernel(1, _laplacian_rule, name="laplacian")


def adjacency_kernel() -> PatternKernel:
    return PatternKernel(1, _adjacency_rule, name="adjacency")


def constant_kernel(c: float = 1.0) -> PatternKernel:
    return PatternKernel(
        0, lambda ball: float(c) if ball.distance == 0 else 0.0, name=f"constant:{c!r}"
    )


def kernel_by_name(name: str) -> PatternKernel:
    """'laplacian', 'adjacency' or 'constant' / 'constant:<c>'."""
    if name == "laplacian":
        return laplacian_kernel()
    if name == "adjacency":
        return adjacency_kernel()
    if name == "constant" or name.startswith("constant:"):
        _, _, value = name.partition(":")
        try:
            return constant_kernel(float(value) if value else 1.0)
        except ValueError as exc:
            raise SpecParseError(f"invalid constant kernel {name!r}") from exc
    raise SpecParseError(f"unknown kernel {name!r}")


def _ball_graph(certificate: tuple) -> nx.Graph:
    n, edges, _ = certificate
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    return graph


def pattern_operator(kernel: PatternKernel, g: nx.Graph) -> SymMatrix:
    """
    A(x, y) for every pair within distance r_A, vertices in sorted order.
    The rule is evaluated once per isomorphism class of the marked ball, on
    its canonical representative.
    """
    if not kernel.symmetric:
        raise ValueError(f"kernel {kernel.name!r} is not flagged symmetric")
    nodes = sorted(g.nodes)
    index = {node: m for m, node in enumerate(nodes)}
    matrix = np.zeros((len(nodes), len(nodes)))
    values: Dict[tuple, float] = {}
    for x in nodes:
        lengths = nx.single_source_shortest_path_length(g, x, cutoff=kernel.radius)
        ball = g.subgraph(lengths)
        for y, distance in lengths.items():
            certificate = canonical_form(ball, (x, y))
            if certificate not in values:
                _, _, (cx, cy) = certificate
                values[certificate] = kernel.rule(
                    MarkedBall(_ball_graph(certificate), cx, cy, distance)
                )
            matrix[index[x], index[y]] = values[certificate]
    try:
        return SymMatrix(matrix)
    except ValueError as exc:
        raise ValueError(f"kernel {kernel.name!r} produced an asymmetric operator") from exc


def path_limit_ids(lam):
    """Limit IDS of the path Laplacian: arccos(1 - lambda/2) / pi on [0, 4]."""
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, 4.0)
    return np.arccos(1.0 - lam / 2.0) / math.pi


@dataclass
class TowerReport:
    levels: List[int]
    n_vertices: List[int]
    functions: List[StepFunction]
    distances: List[float] = field(default_factory=list)
    rank_defects: List[float] = field(default_factory=list)
    bounds: List[float] = field(default_factory=list)
    certified_error: List[float] = field(default_factory=list)

    @property
    def perturbation_bound_holds(self) -> bool:
        return all(
            dist <= defect + PERTURBATION_SLACK
            for dist, defect in zip(self.distances, self.rank_defects)
        )

    @property
    def defects_within_bounds(self) -> bool:
        return all(
            defect <= bound + PERTURBATION_SLACK
            for defect, bound in zip(self.rank_defects, self.bounds)
        )

    def reference_distance(self, reference=path_limit_ids, lower=0.0, upper=4.0) -> float:
        """sup |N_deepest - F| against a closed-form limit."""
        return sup_distance_to(self.functions[-1], reference, lower, upper)


def _glue_neighbourhood(level: SelfSimilarLevel, radius: int) -> int:
    reached = set()
    for endpoint in level.glue_endpoints:
        reached.update(
            nx.single_source_shortest_path_length(level.graph, endpoint, cutoff=radius)
        )
    return len(reached)


def tower_ids(
    spec: SelfSimilarSpec,
    kernel: PatternKernel,
    max_level: int,
    tol: float = RANK_TOL,
    dense_limit: int = DENSE_LIMIT,
    mapper: Mapper = map,
) -> TowerReport:
    """
    Spectral distributions of A_{G_n} for n = 1..max_level, with the distance
    between consecutive levels, the measured normalized rank of
    A_{G_{n+1}} - (k copies of A_{G_n}) and the a priori bound
    |vertices within r_A of a glue endpoint| / |V(G_{n+1})|.
    """
    if spec.vertex_count(max_level) > dense_limit:
        raise CapExceededError(
            f"G_{max_level} has {spec.vertex_count(max_level)} vertices, "
            f"dense limit is {dense_limit}",
            hint="lower the maximum level or raise dense_limit",
        )
    tower = build_tower(spec, max_level)
    operators = list(mapper(lambda t: pattern_operator(kernel, t.graph), tower))
    functions = list(mapper(spectral_distribution, operators))
    report = TowerReport(
        levels=[t.level for t in tower],
        n_vertices=[t.n_vertices for t in tower],
        functions=functions,
    )
    for previous, current, small, large in zip(
        tower, tower[1:], operators, operators[1:]
    ):
        copies = np.kron(np.eye(spec.k), small.entries)
        difference = large.entries - copies
        support = np.flatnonzero(np.any(difference != 0, axis=1))
        rows = numerical_rank(difference[np.ix_(support, support)], tol) if support.size else 0
        report.rank_defects.append(rows / current.n_vertices)
        report.bounds.append(
            _glue_neighbourhood(current, kernel.radius) / current.n_vertices
        )
        report.distances.append(
            sup_distance(functions[previous.level - 1], functions[current.level - 1])
        )
    for position in range(len(tower)):
        report.certified_error.append(math.fsum(report.bounds[position:]))
    logger.info(
        f"tower {spec.name!r} with kernel {kernel.name!r} up to level {max_level}",
        distances=report.distances,
    )
    return report


def pattern_census(g: nx.Graph, r: int) -> Dict[str, float]:
    """Frequencies of the rooted r-ball isomorphism classes over all vertices."""
    if r < 0:
        raise ValueError("census radius must be nonnegative")
    counts: Dict[str, int] = {}
    for x in g.nodes:
        ball = g.subgraph(nx.single_source_shortest_path_length(g, x, cutoff=r))
        certificate = canonical_form(ball, (x,))
        digest = hashlib.sha1(repr(certificate).encode()).hexdigest()[:10]
        label = f"n{ball.number_of_nodes()}-deg{ball.degree(x)}-{digest}"
        counts[label] = counts.get(label, 0) + 1
    total = g.number_of_nodes()
    return {label: counts[label] / total for label in sorted(counts)}
