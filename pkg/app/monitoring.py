import logging

from app import config

LOGGER_NAME = "concept-statistics"

_configured = False


def get_logger() -> logging.Logger:
    """
    Retourne le logger de l'application, configuré une seule fois.

    Si APPLICATIONINSIGHTS_CONNECTION_STRING est défini, les événements sont
    aussi envoyés vers Application Insights.
    """
    global _configured
    logger = logging.getLogger(LOGGER_NAME)
    if _configured:
        return logger

    logging.basicConfig(level=config.LOG_LEVEL)
    _configured = True

    if config.APPINSIGHTS_CONN:
        try:
            from opencensus.ext.azure.log_exporter import AzureLogHandler
            handler = AzureLogHandler(connection_string=config.APPINSIGHTS_CONN)
            logger.addHandler(handler)
            logger.info("app_startup", extra={
                "custom_dimensions": {
                    "event_type": "startup",
                    "status": "application_insights_connected"
                }
            })
        except ImportError:
            logger.warning("opencensus-ext-azure non installé, monitoring désactivé")

    return logger
