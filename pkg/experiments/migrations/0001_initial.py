# Generated by Django 5.2.6 on 2026-10-19 10:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=100)),
                ('method', models.CharField(max_length=10)),
                ('backend', models.CharField(max_length=100)),
                ('config_digest', models.CharField(max_length=32)),
                ('started_at', models.DateTimeField()),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('triples', models.IntegerField(default=0)),
                ('completed', models.IntegerField(default=0)),
                ('abstained', models.IntegerField(default=0)),
                ('failed', models.IntegerField(default=0)),
                ('transcript_path', models.CharField(max_length=500)),
            ],
            options={
                'ordering': ('name', 'backend', 'method'),
                'unique_together': {('name', 'method', 'backend')},
            },
        ),
        migrations.CreateModel(
            name='ReportSnapshot',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('run_name', models.CharField(max_length=100)),
                ('policy', models.CharField(max_length=10)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('cells', models.JSONField(default=list)),
            ],
        ),
    ]
