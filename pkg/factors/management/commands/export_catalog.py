from pathlib import Path

from django.core.management.base import BaseCommand

from factors.catalog import load_catalog


class Command(BaseCommand):
    help = "Exporta el catálogo de factores en formato de archivo de override (JSONL)."

    def add_arguments(self, parser):
        parser.add_argument("path", nargs="?", help="Archivo destino (por defecto, stdout)")

    def handle(self, *args, **options):
        catalog = load_catalog()
        text = catalog.to_jsonl()
        if not options["path"]:
            self.stdout.write(text, ending="")
            return
        Path(options["path"]).write_text(text, encoding="utf-8")
        provisional = sum(1 for f in catalog if f.provisional)
        self.stdout.write(self.style.SUCCESS(
            f"{catalog.count} factores exportados a {options['path']} ({provisional} provisionales)"
        ))
