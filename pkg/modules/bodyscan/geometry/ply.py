"""
Reading and writing PLY files (ASCII and binary little-endian).

Point clouds use the vertex properties x, y, z with optional nx, ny, nz and
red, green, blue (0-255); meshes additionally carry a face element with a
``vertex_indices`` list.
"""

import io
from typing import IO, Dict, List, Tuple, Optional, NamedTuple
from pathlib import Path

import numpy as np
import numpy.typing as npt

from .mesh import TriangleMesh
from .clouds import unit_rows, PointCloud
from ..errors import PlyFormatError

_SCALAR_TYPES = {
    'char': 'i1', 'int8': 'i1',
    'uchar': 'u1', 'uint8': 'u1',
    'short': 'i2', 'int16': 'i2',
    'ushort': 'u2', 'uint16': 'u2',
    'int': 'i4', 'int32': 'i4',
    'uint': 'u4', 'uint32': 'u4',
    'float': 'f4', 'float32': 'f4',
    'double': 'f8', 'float64': 'f8',
}

FORMATS = ('ascii', 'binary_little_endian')


class Property(NamedTuple):
    name: str
    dtype: str
    # For list properties, the type of the length prefix.
    count_dtype: Optional[str] = None


class Element(NamedTuple):
    name: str
    count: int
    properties: List[Property]


def _parse_header(stream: IO[bytes]) -> Tuple[str, List[Element]]:
    if stream.readline().strip() != b'ply':
        raise PlyFormatError("Not a PLY file (missing magic)")

    file_format = None
    elements: List[Element] = []
    while True:
        raw = stream.readline()
        if not raw:
            raise PlyFormatError("Unexpected end of file inside header")
        words = raw.decode('ascii').split()
        if not words or words[0] in ('comment', 'obj_info'):
            continue
        keyword = words[0]
        if keyword == 'end_header':
            break
        if keyword == 'format':
            file_format = words[1]
            if file_format not in FORMATS:
                raise PlyFormatError("Unsupported PLY format {!r}".format(file_format))
        elif keyword == 'element':
            elements.append(Element(words[1], int(words[2]), []))
        elif keyword == 'property':
            if not elements:
                raise PlyFormatError("Property declared before any element")
            try:
                if words[1] == 'list':
                    prop = Property(words[4], _SCALAR_TYPES[words[3]], _SCALAR_TYPES[words[2]])
                else:
                    prop = Property(words[2], _SCALAR_TYPES[words[1]])
            except (KeyError, IndexError):
                raise PlyFormatError("Bad property line {!r}".format(raw)) from None
            elements[-1].properties.append(prop)
        else:
            raise PlyFormatError("Unknown header keyword {!r}".format(keyword))

    if file_format is None:
        raise PlyFormatError("PLY header has no format line")
    return file_format, elements


ElementData = Dict[str, 'npt.NDArray[np.float64]']


def _read_ascii(stream: IO[bytes], elements: List[Element]) -> Dict[str, ElementData]:
    lines = io.TextIOWrapper(stream, encoding='ascii')
    result = {}
    for element in elements:
        columns: Dict[str, List[object]] = {p.name: [] for p in element.properties}
        for _ in range(element.count):
            values = lines.readline().split()
            position = 0
            for prop in element.properties:
                if prop.count_dtype is None:
                    columns[prop.name].append(float(values[position]))
                    position += 1
                else:
                    length = int(values[position])
                    columns[prop.name].append(
                        [int(x) for x in values[position + 1:position + 1 + length]],
                    )
                    position += 1 + length
        result[element.name] = _columns_to_arrays(element, columns)
    return result


def _read_binary(stream: IO[bytes], elements: List[Element]) -> Dict[str, ElementData]:
    data = stream.read()
    offset = 0
    result = {}
    for element in elements:
        if all(p.count_dtype is None for p in element.properties):
            dtype = np.dtype([(p.name, '<' + p.dtype) for p in element.properties])
            end = offset + dtype.itemsize * element.count
            if end > len(data):
                raise PlyFormatError("Truncated {!r} element".format(element.name))
            table = np.frombuffer(data[offset:end], dtype=dtype)
            offset = end
            result[element.name] = {
                p.name: table[p.name].astype(float)
                for p in element.properties
            }
            continue

        columns: Dict[str, List[object]] = {p.name: [] for p in element.properties}
        for _ in range(element.count):
            for prop in element.properties:
                if prop.count_dtype is None:
                    item = np.dtype('<' + prop.dtype)
                    columns[prop.name].append(
                        float(np.frombuffer(data, dtype=item, count=1, offset=offset)[0]),
                    )
                    offset += item.itemsize
                else:
                    count_type = np.dtype('<' + prop.count_dtype)
                    counts = np.frombuffer(data, dtype=count_type, count=1, offset=offset)
                    length = int(counts[0])
                    offset += count_type.itemsize
                    item = np.dtype('<' + prop.dtype)
                    columns[prop.name].append(
                        np.frombuffer(data, dtype=item, count=length, offset=offset).tolist(),
                    )
                    offset += item.itemsize * length
        result[element.name] = _columns_to_arrays(element, columns)
    return result


def _columns_to_arrays(element: Element, columns: Dict[str, List[object]]) -> ElementData:
    arrays = {}
    for prop in element.properties:
        values = columns[prop.name]
        if prop.count_dtype is None:
            arrays[prop.name] = np.array(values, dtype=float)
        else:
            faces = [_triangulate(face) for face in values]  # type: ignore[arg-type]
            arrays[prop.name] = np.array(
                [t for triangles in faces for t in triangles],
                dtype=float,
            ).reshape(-1, 3)
    return arrays


def _triangulate(face: List[int]) -> List[Tuple[int, int, int]]:
    if len(face) < 3:
        raise PlyFormatError("Face with fewer than three vertices: {!r}".format(face))
    return [(face[0], face[i], face[i + 1]) for i in range(1, len(face) - 1)]


def _read(path: Path) -> Dict[str, ElementData]:
    with path.open('rb') as stream:
        file_format, elements = _parse_header(stream)
        if file_format == 'ascii':
            return _read_ascii(stream, elements)
        return _read_binary(stream, elements)


def _stack(
    vertex: ElementData,
    names: Tuple[str, str, str],
) -> 'Optional[npt.NDArray[np.float64]]':
    if not all(name in vertex for name in names):
        return None
    return np.column_stack([vertex[name] for name in names])


def read_ply(path: Path) -> PointCloud:
    elements = _read(path)
    vertex = elements.get('vertex')
    if vertex is None:
        raise PlyFormatError("{} has no vertex element".format(path))

    points = _stack(vertex, ('x', 'y', 'z'))
    if points is None:
        raise PlyFormatError("{} vertices lack x/y/z".format(path))
    normals = _stack(vertex, ('nx', 'ny', 'nz'))
    colors = _stack(vertex, ('red', 'green', 'blue'))
    return PointCloud(
        points,
        None if normals is None else unit_rows(normals),
        None if colors is None else colors / 255,
    )


def read_ply_mesh(path: Path) -> TriangleMesh:
    elements = _read(path)
    vertex = elements.get('vertex')
    points = None if vertex is None else _stack(vertex, ('x', 'y', 'z'))
    if points is None:
        raise PlyFormatError("{} has no vertex positions".format(path))
    faces = elements.get('face', {})
    indices = faces.get('vertex_indices', faces.get('vertex_index'))
    if indices is None:
        raise PlyFormatError("{} has no face element".format(path))
    return TriangleMesh(points, indices.astype(np.int64))


def _header(file_format: str, count: int, properties: List[str], faces: int = 0) -> bytes:
    lines = ['ply', 'format {} 1.0'.format(file_format), 'element vertex {}'.format(count)]
    lines += ['property {}'.format(p) for p in properties]
    if faces:
        lines += ['element face {}'.format(faces), 'property list uchar int vertex_indices']
    lines.append('end_header')
    return ('\n'.join(lines) + '\n').encode('ascii')


def _vertex_table(cloud: PointCloud) -> Tuple[List[str], npt.NDArray[np.void]]:
    fields = [('x', '<f8'), ('y', '<f8'), ('z', '<f8')]
    if cloud.normals is not None:
        fields += [('nx', '<f8'), ('ny', '<f8'), ('nz', '<f8')]
    if cloud.colors is not None:
        fields += [('red', 'u1'), ('green', 'u1'), ('blue', 'u1')]

    table = np.zeros(len(cloud), dtype=fields)
    for axis, name in enumerate('xyz'):
        table[name] = cloud.points[:, axis]
    if cloud.normals is not None:
        for axis, name in enumerate(('nx', 'ny', 'nz')):
            table[name] = cloud.normals[:, axis]
    if cloud.colors is not None:
        rgb = np.round(cloud.colors * 255).astype(np.uint8)
        for axis, name in enumerate(('red', 'green', 'blue')):
            table[name] = rgb[:, axis]

    declared = [
        '{} {}'.format('uchar' if dtype == 'u1' else 'double', name)
        for name, dtype in fields
    ]
    return declared, table


def _write(
    path: Path,
    cloud: PointCloud,
    triangles: 'Optional[npt.NDArray[np.int64]]',
    file_format: str,
) -> None:
    if file_format not in FORMATS:
        raise ValueError("Unknown PLY format {!r}".format(file_format))

    declared, table = _vertex_table(cloud)
    face_count = 0 if triangles is None else len(triangles)

    with path.open('wb') as stream:
        stream.write(_header(file_format, len(cloud), declared, face_count))
        if file_format == 'binary_little_endian':
            stream.write(table.tobytes())
            if triangles is not None and face_count:
                faces = np.zeros(face_count, dtype=[('n', 'u1'), ('v', '<i4', (3,))])
                faces['n'] = 3
                faces['v'] = triangles
                stream.write(faces.tobytes())
            return

        for row in table:
            stream.write((' '.join(
                str(int(value)) if table.dtype[i] == np.uint8 else repr(float(value))
                for i, value in enumerate(row)
            ) + '\n').encode('ascii'))
        if triangles is not None:
            for a, b, c in triangles:
                stream.write('3 {} {} {}\n'.format(a, b, c).encode('ascii'))


def write_ply(
    path: Path,
    cloud: PointCloud,
    file_format: str = 'binary_little_endian',
) -> None:
    _write(path, cloud, None, file_format)


def write_ply_mesh(
    path: Path,
    mesh: TriangleMesh,
    file_format: str = 'binary_little_endian',
) -> None:
    _write(path, PointCloud(mesh.vertices), mesh.triangles, file_format)
