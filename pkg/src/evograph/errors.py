"""Exception hierarchy shared by every evograph module."""


class GraphError(Exception):
    """Base class for all evograph errors."""


class DuplicateEdge(GraphError):
    def __init__(self, src, dst):
        super().__init__(f"duplicate edge ({src}, {dst})")
        self.edge = (src, dst)


class VertexOutOfRange(GraphError):
    def __init__(self, vertex, vertex_count):
        super().__init__(f"vertex {vertex} out of range for V={vertex_count}")
        self.vertex = vertex


class InvalidWeight(GraphError):
    pass


class OverlapError(GraphError):
    def __init__(self, src, dst):
        super().__init__(f"edge ({src}, {dst}) appears in more than one composed graph")
        self.edge = (src, dst)


class DeleteMissingEdge(GraphError):
    def __init__(self, src, dst):
        super().__init__(f"cannot delete absent edge ({src}, {dst})")
        self.edge = (src, dst)


class AddExistingEdge(GraphError):
    def __init__(self, src, dst):
        super().__init__(f"cannot add present edge ({src}, {dst})")
        self.edge = (src, dst)


class InvalidBatch(GraphError):
    pass


class UnknownSnapshot(GraphError):
    pass


class NotAdjacent(GraphError):
    pass


class NonConvergence(GraphError):
    pass


class InsufficientEdges(GraphError):
    pass


class ParseError(GraphError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno
