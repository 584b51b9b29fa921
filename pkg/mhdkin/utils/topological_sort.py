import heapq
from collections.abc import Hashable, Sequence

from mhdkin.core.exceptions import InvalidBlockStructureError


def topological_sort(
    dependencies: dict[Hashable, list[Hashable]],
    priority: Sequence[Hashable] | None = None,
) -> list[Hashable]:
    """
    Perform a deterministic topological sort.

    Args:
        dependencies: Dict mapping a node to the nodes it depends on
        priority: Preferred order among nodes that are ready at the same time;
            nodes not listed come after, in order of first appearance

    Returns:
        List of nodes, every node after all of its dependencies

    Raises:
        InvalidBlockStructureError: If circular dependencies are detected
    """
    deps = {node: set(depends_on) for node, depends_on in dependencies.items()}

    all_nodes: list[Hashable] = []
    for node, depends_on in dependencies.items():
        for candidate in (node, *depends_on):
            if candidate not in all_nodes:
                all_nodes.append(candidate)
    for node in all_nodes:
        deps.setdefault(node, set())

    rank = {node: index for index, node in enumerate(priority or [])}
    order = {
        node: (rank.get(node, len(rank)), position)
        for position, node in enumerate(all_nodes)
    }

    # Kahn's algorithm with a priority queue of ready nodes
    in_degree = {node: len(deps[node]) for node in all_nodes}
    dependents: dict[Hashable, list[Hashable]] = {node: [] for node in all_nodes}
    for node, depends_on in deps.items():
        for dependency in depends_on:
            dependents[dependency].append(node)

    queue = [order[node] for node in all_nodes if in_degree[node] == 0]
    heapq.heapify(queue)
    result = []

    while queue:
        _, position = heapq.heappop(queue)
        current = all_nodes[position]
        result.append(current)
        for node in dependents[current]:
            in_degree[node] -= 1
            if in_degree[node] == 0:
                heapq.heappush(queue, order[node])

    if len(result) != len(all_nodes):
        raise InvalidBlockStructureError("circular coupling between blocks")

    return result


def validate_dependencies(couplings: list[tuple[Hashable, Hashable]]) -> dict[Hashable, list[Hashable]]:
    """
    Convert (row, column) off-diagonal couplings to a dependency map.

    A row of a block triangular system can be solved once every column it
    couples to is known, so the row depends on the column.

    Raises:
        InvalidBlockStructureError: If a coupling sits on the diagonal
    """
    dependencies: dict[Hashable, list[Hashable]] = {}

    for row, column in couplings:
        if row == column:
            raise InvalidBlockStructureError(f"block {row} cannot couple to itself")
        dependencies.setdefault(row, [])
        dependencies.setdefault(column, [])
        if column not in dependencies[row]:
            dependencies[row].append(column)

    return dependencies
