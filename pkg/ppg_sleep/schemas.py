from typing import Dict, List

# Column layouts of the CSV files the pipeline reads and writes
CSV_SCHEMAS: Dict[str, List[str]] = {
	'recording': ['t_s', 'ppg_green', 'ppg_ir', 'acc_x_g', 'acc_y_g', 'acc_z_g'],
	'ecg_reference': ['t_s', 'ecg_beat'],
	'resp_reference': ['t_s', 'resp_rate_min'],
	'output': ['t_s', 'hr_bpm', 'br_min', 'quality'],
	'bbi': ['t_s', 'bbi_ms', 'flag', 'quality'],
	'truth': ['t_s', 'true_bbi_ms', 'true_br_min'],
}

PPG_CHANNELS: Dict[str, str] = {'green': 'ppg_green', 'ir': 'ppg_ir'}

QUALITY_OK = 'ok'
QUALITY_LOW = 'low_confidence'


def get_schema(kind: str) -> List[str]:
	"""
	Get the required columns of a CSV file kind.

	Args:
	    kind: One of the CSV_SCHEMAS keys.

	Returns:
	    List[str]: Column names in file order.

	"""
	return CSV_SCHEMAS[kind]
