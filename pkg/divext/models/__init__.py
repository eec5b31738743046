"""
Пакет с моделями данных для проекта.
""" 