APP_NAME = "OneBitRadar"
APP_VERSION = "0.1.0"

SCENE_SCHEMA_VERSION = 1
WAVEFORM_FORMAT = "onebit-waveform"
WAVEFORM_FORMAT_VERSION = 1

# 10*log10 is used for every power ratio
DB_FLOOR = -300.0
