class BotspotterError(Exception):
    exit_code = 1


class ConfigError(BotspotterError):
    exit_code = 2


class DataError(BotspotterError):
    exit_code = 3


class StaleUpstreamError(DataError):
    pass
