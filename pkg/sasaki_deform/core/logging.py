"""
日志配置

<rationale>
- 标准库 logging + dictConfig，一次性配置 sasaki_deform 日志树
- 库模块只使用 logging.getLogger(__name__)，不直接输出
- text 格式供人读，json 格式每行一条记录，便于实验日志归档
</rationale>
"""

import json
import logging
import logging.config
from typing import Any, Dict, Optional

from sasaki_deform.core.config import settings


class JsonLineFormatter(logging.Formatter):
    """每条记录输出一行JSON"""

    def format(self, record: logging.LogRecord) -> str:
        payload: Dict[str, Any] = {
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(payload, sort_keys=True)


def build_config(level: str, fmt: str) -> Dict[str, Any]:
    formatter = "json" if fmt == "json" else "text"
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "text": {"format": "%(asctime)s %(levelname)-7s %(name)s: %(message)s"},
            "json": {"()": JsonLineFormatter},
        },
        "handlers": {
            "stderr": {
                "class": "logging.StreamHandler",
                "stream": "ext://sys.stderr",
                "formatter": formatter,
            },
        },
        "loggers": {
            "sasaki_deform": {"handlers": ["stderr"], "level": level.upper(), "propagate": False},
        },
    }


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    logging.config.dictConfig(
        build_config(level or settings.LOG_LEVEL, fmt or settings.LOG_FORMAT)
    )
