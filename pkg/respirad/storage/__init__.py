# respirad/storage/__init__.py
