"""
Version and file-format information for the hyper-entanglement toolkit
"""

VERSION = "1.0"
BUILD_DATE = "2026-10-19"
DESCRIPTION = "Simulation and phase inference for frequency-bin hyper-entangled photon pairs"

# on-disk format versions; the writers stamp these and the readers reject anything else
FORMAT_VERSIONS = {
    "matrix_container": 1,
    "timetag_stream": 1,
    "json_report": 1,
}


def get_version_string() -> str:
    """Get formatted version string"""
    return f"bst v{VERSION} (Built: {BUILD_DATE})"


def get_full_version_info() -> dict:
    """Get complete version information"""
    return {
        "version": VERSION,
        "build_date": BUILD_DATE,
        "description": DESCRIPTION,
        "formats": FORMAT_VERSIONS,
    }
