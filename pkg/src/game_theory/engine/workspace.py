import os
import tempfile
from pathlib import Path
from typing import Any, Tuple

from game_theory.utils import LoggerMixin


class Resource:
    """
    Directory or file relative to a workspace root.
    """

    def __init__(self, *parts: str):
        self.parts = parts

    def __repr__(self) -> str:
        return '/'.join(('', *self.parts))

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, Resource):
            return False
        return type(self) is type(other) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash((type(self), self.parts))


class Collection(Resource):
    """
    Directory in a workspace.
    """

    def __repr__(self) -> str:
        return super().__repr__().rstrip('/') + '/'


class File(Resource):
    """
    File in a workspace.
    """


class FileSystemWorkspace(LoggerMixin):
    """
    Run artifacts on a local filesystem.

    Files are written to a temporary sibling and renamed into place, so an
    interrupted run never leaves a truncated file at its final path.
    """

    def __init__(self, base: str) -> None:
        super().__init__()
        self.base = Path(base)
        self.root = Collection()

    def get_path(self, r: Resource) -> Path:
        return self.base.joinpath(*r.parts)

    def create_collection(self, c: Collection) -> None:
        path = self.get_path(c)
        self.logger.debug("mkdir %s", path)
        os.makedirs(path, exist_ok=True)

    def read(self, f: File) -> str:
        path = self.get_path(f)
        self.logger.debug("read %s", path)
        with open(path, 'r') as fd:
            return fd.read()

    def write(self, f: File, content: str) -> None:
        path = self.get_path(f)
        self.logger.debug("write %s", path)
        os.makedirs(path.parent, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
        try:
            with os.fdopen(fd, 'w') as out:
                out.write(content)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise

    def append(self, f: File, content: str) -> None:
        """ Appends to a streamed file such as a convergence trace."""
        path = self.get_path(f)
        os.makedirs(path.parent, exist_ok=True)
        with open(path, 'a') as out:
            out.write(content)
            out.flush()


def locate(path: str) -> Tuple[FileSystemWorkspace, File]:
    """ Workspace of the file's directory and the file inside it."""
    directory, name = os.path.split(os.path.abspath(path))
    return FileSystemWorkspace(directory), File(name)


def read_file(path: str) -> str:
    ws, f = locate(path)
    return ws.read(f)


def write_file(path: str, content: str) -> None:
    ws, f = locate(path)
    ws.write(f, content)
