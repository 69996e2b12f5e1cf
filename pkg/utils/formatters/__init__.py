"""
报告格式化器模块
"""

from .base import ReportFormatter

__all__ = ["ReportFormatter"]
