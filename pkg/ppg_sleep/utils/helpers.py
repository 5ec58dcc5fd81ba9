"""
Helpers module for the ppg-sleep package.

This module provides helper functions used throughout the package.
"""

import os
import tempfile
from typing import Any, Dict, List, Optional, Union


def ensure_directory_exists(directory_path: str) -> str:
	"""
	Ensure that a directory exists, creating it if necessary.

	Args:
	    directory_path: The path to the directory.

	Returns:
	    str: The path to the directory.

	"""
	if directory_path and not os.path.exists(directory_path):
		os.makedirs(directory_path, exist_ok=True)
	return directory_path


def atomic_write(file_path: str, data: Union[bytes, str]) -> str:
	"""
	Write a file so that readers never observe a partial result.

	The payload goes to a temporary file in the target directory which is then
	renamed over the destination.

	Args:
	    file_path: Destination path.
	    data: Bytes or text to write. Text is encoded as UTF-8.

	Returns:
	    str: The destination path.

	"""
	directory = os.path.dirname(os.path.abspath(file_path))
	ensure_directory_exists(directory)
	payload = data.encode('utf-8') if isinstance(data, str) else data
	fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-')
	try:
		with os.fdopen(fd, 'wb') as f:
			f.write(payload)
		os.replace(tmp_path, file_path)
	except BaseException:
		if os.path.exists(tmp_path):
			os.remove(tmp_path)
		raise
	return file_path


def recording_name(file_path: str) -> str:
	"""
	Derive a recording name from a file path.

	Strips the directory, the extension and the stage suffixes the pipeline
	appends, so ``night1.csv``, ``night1.ftr`` and ``night1_output.csv`` all map
	to ``night1``.

	Args:
	    file_path: Path of a recording, feature or output file.

	Returns:
	    str: The recording name.

	"""
	name, _ = os.path.splitext(os.path.basename(file_path))
	for suffix in ('_output', '_bbi', '_ecg', '_resp', '_truth'):
		name = name.removesuffix(suffix)
	return name


def format_table(
	data: List[Dict[str, Any]],
	fields: Optional[List[str]] = None,
	float_format: str = '{:.2f}',
) -> str:
	"""
	Format rows as an aligned-column text table.

	Args:
	    data: The rows to format.
	    fields: The fields to include in the table, in order.
	    float_format: Format applied to float cells.

	Returns:
	    str: The table, header first.

	"""
	if not data:
		return 'No data found.'

	# If fields not specified, use all fields from the first item
	if not fields:
		fields = list(data[0].keys())

	def cell(value: Any) -> str:
		if isinstance(value, float):
			return float_format.format(value)
		return '' if value is None else str(value)

	cells = [{field: cell(item.get(field)) for field in fields} for item in data]
	widths = {
		field: max(len(field), *(len(row[field]) for row in cells)) for field in fields
	}

	header = ' | '.join(f'{field:{widths[field]}}' for field in fields)
	lines = [header, '-' * len(header)]
	for row in cells:
		lines.append(' | '.join(f'{row[field]:>{widths[field]}}' for field in fields))
	return '\n'.join(lines)
