"""Setup parameters of the microwave cavity experiment.

Times are in microseconds, lengths in millimetres, angular frequencies in
rad/us.
"""
import math

OMEGA0 = 2 * math.pi * 0.046      # vacuum Rabi angular frequency, 46 kHz
ALPHA = math.sqrt(12.7)           # initial coherent amplitude (12.7 photons)
WAIST = 5.96                      # cavity mode waist, mm
VELOCITY = 0.25                   # atomic velocity, mm/us (250 m/s)
DETECTION_ERROR = 0.05            # wrong state attribution probability
POSITION_SIGMA = 0.5              # longitudinal sample spread (std), mm
F_SQL = 4.0                       # QFI of a coherent state

# alpha + |beta| <= 5.6 passes the coherent tail guard at 80
DEFAULT_N_MAX = 80
