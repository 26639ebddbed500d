import argparse
import copy
import json
import logging
import os
import os.path
import pprint

import deepdiff

import jinja2

import tabulate

from . import __version__
from . import errors


DEFAULT_TEMPLATE = os.path.join(os.path.dirname(__file__), "report.txt")


class Report:
    """
    JSON document describing one run: what was asked, with which
    configuration, and what came out. Carries no timestamps so identical
    runs give identical files.
    """

    def __init__(self, filename, data=None):
        self.filename = filename
        if data is not None:
            self._data = data
            assert "name" in data
            assert "results" in data
        elif filename is not None:
            self.load()
        else:
            self.clear()

    def load(self):
        try:
            with open(self.filename, "r") as fp:
                self._data = json.load(fp)
            logging.debug(f"Loaded report from {self.filename}")
        except FileNotFoundError:
            self.clear()
            logging.info(f"Opening empty report {self.filename}")
        except json.JSONDecodeError as e:
            raise errors.ValidityError(f"Report {self.filename} is not valid JSON: {e}")

    def __getitem__(self, key):
        return self._data.get(key, None)

    def __setitem__(self, key, value):
        self._data[key] = value

    def __repr__(self):
        return f"<Report name={self.get('name')} command={self.get('command')} filename={self.filename}>"

    def __eq__(self, other):
        return self._data == other._data

    @staticmethod
    def _path(multikey):
        return [k for k in multikey.split(".") if k != ""]

    def _parent(self, path, create=False):
        """
        Dict holding the last key of `path`, or None when it is not there.
        With `create` set, missing or non-dict levels are replaced by dicts.
        """
        node = self._data
        for key in path[:-1]:
            child = node.get(key)
            if not isinstance(child, dict):
                if not create:
                    if child is not None:
                        logging.warning(f"Report key {key} is not a dict, cannot look into it")
                    return None
                child = node[key] = {}
            node = child
        return node

    def get(self, multikey):
        """
        Value at dotted path, e.g. get("results.certificate.verdict"), or
        None when any key along the way is missing.
        """
        path = self._path(multikey)
        if not path:
            return self._data
        parent = self._parent(path)
        return None if parent is None else parent.get(path[-1])

    def set(self, multikey, value):
        path = self._path(multikey)
        logging.debug(f"Setting {'.'.join(path)} in report")
        self._parent(path, create=True)[path[-1]] = copy.deepcopy(value)

    def remove(self, multikey):
        path = self._path(multikey)
        parent = self._parent(path)
        if parent is not None and path[-1] in parent:
            logging.debug(f"Removing {multikey} from report")
            del parent[path[-1]]

    def list(self, multikey):
        """
        Dotted paths of all leaves below `multikey`
        """
        out = []
        for key, value in self.get(multikey).items():
            full = f"{multikey}.{key}" if multikey else key
            if isinstance(value, dict):
                out += self.list(full)
            else:
                out.append(full)
        return out

    def clear(self):
        """
        Default structure
        """
        self._data = {
            "name": None,
            "version": __version__,
            "config_hash": None,
            "seed": None,
            "command": None,
            "parameters": {},
            "results": {},
        }

    def info(self):
        out = ""
        out += f"Filename: {self.filename}\n"
        for k, v in self._data.items():
            if not isinstance(v, dict):
                out += f"{k}: {v}\n"
        return out

    def dump(self):
        return self._data

    def save(self, filename=None):
        if filename is not None:
            self.filename = filename
        assert self.filename is not None, "Report needs a filename to be saved"
        with open(self.filename, "w") as fp:
            json.dump(self.dump(), fp, sort_keys=True, indent=4)
            fp.write("\n")
        logging.debug(f"Saved report to {self.filename}")


def diff_tables(first, second):
    """
    Tables (title, headers, rows) describing differences of two reports
    """
    diff = deepdiff.DeepDiff(first.dump(), second.dump(), view="tree")
    out = []
    if "dictionary_item_added" in diff:
        rows = [[i.path(), i.t2] for i in diff["dictionary_item_added"]]
        out.append(("Dictionary items added", ["path", "added value"], rows))
    if "dictionary_item_removed" in diff:
        rows = [[i.path(), i.t1] for i in diff["dictionary_item_removed"]]
        out.append(("Dictionary items removed", ["path", "removed value"], rows))
    if "values_changed" in diff:
        rows = []
        for i in diff["values_changed"]:
            d = None
            try:
                a = float(i.t1)
                b = float(i.t2)
                d_raw = (b - a) / a * 100
                if abs(d_raw) < 1:
                    d = f"{d_raw:.3f}"
                else:
                    d = f"{d_raw:.0f}"
            except (TypeError, ValueError, ZeroDivisionError):
                pass
            rows.append([i.path(), i.t1, i.t2, d])
        out.append(("Values changed", ["path", "first", "second", "change [%]"], rows))
    if "type_changes" in diff:
        rows = [[i.path(), type(i.t1), type(i.t2)] for i in diff["type_changes"]]
        out.append(("Types changed", ["path", "first", "second"], rows))
    return diff, out


def main_diff(argv=None):
    parser = argparse.ArgumentParser(
        description="Compare two genent report files, exit 1 when they differ",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("first", help="Baseline report")
    parser.add_argument("second", help="Report to compare with the baseline")
    parser.add_argument("--tables", action="store_true", help="Print differences as tables")
    parser.add_argument("-d", "--debug", action="store_true", help="Show debug output")
    args = parser.parse_args(argv)

    if args.debug:
        logging.basicConfig(level=logging.DEBUG)

    logging.debug(f"Args: {args}")

    first = Report(args.first)
    second = Report(args.second)

    diff, tables = diff_tables(first, second)
    if args.tables:
        print(f"Keys: {', '.join(diff.keys())}")
        for title, headers, rows in tables:
            print(f"\n{title}:\n")
            print(tabulate.tabulate(rows, headers=headers))
    else:
        pprint.pprint(diff)
    return 0 if len(diff) == 0 else 1


def render(data, template=None):
    if template is None:
        template = DEFAULT_TEMPLATE
    env = jinja2.Environment(loader=jinja2.FileSystemLoader(os.path.dirname(os.path.abspath(template))))
    env.filters["tabulate"] = lambda rows, headers="keys": tabulate.tabulate(rows, headers=headers)
    return env.get_template(os.path.basename(template)).render({"data": data})


def main_report():
    parser = argparse.ArgumentParser(
        description="Create a text summary of a genent report file",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("report", help="Report file to format")
    parser.add_argument("--template", default=DEFAULT_TEMPLATE, help="Report template file to use")
    parser.add_argument("-d", "--debug", action="store_true", help="Show debug output")
    args = parser.parse_args()

    if args.debug:
        logging.basicConfig(level=logging.DEBUG)

    logging.debug(f"Args: {args}")

    print(render(Report(args.report), args.template))
    return 0
